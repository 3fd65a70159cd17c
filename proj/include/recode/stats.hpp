#pragma once

// Goodness-of-fit tests and small distribution helpers used by the harness.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "recode/error.hpp"

namespace recode {

enum class GofKind { ks, ks_two_sample, chi_square, chi_square_homogeneity };

inline std::string_view to_string(GofKind kind) noexcept {
  switch (kind) {
    case GofKind::ks: return "ks";
    case GofKind::ks_two_sample: return "ks2";
    case GofKind::chi_square: return "chi2";
    case GofKind::chi_square_homogeneity: return "chi2-homogeneity";
  }
  return "?";
}

/// Outcome of one goodness-of-fit test. pass <=> statistic < threshold.
struct GofResult {
  GofKind kind = GofKind::ks;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::size_t n = 0;
  std::size_t dof = 0;
};

/// Welford accumulator for a mean and its standard error.
class RunningStats {
public:
  void add(double v) noexcept {
    ++n_;
    double const delta = v - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (v - mean_);
  }

  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_error() const noexcept { return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Asymptotic Kolmogorov constant c(alpha); 1.63 at alpha = 0.01.
inline double ks_critical_constant(double alpha) {
  if (alpha == 0.01) return 1.63;
  return std::sqrt(-0.5 * std::log(alpha / 2.0));
}

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
inline GofResult ks_test(std::vector<double> samples, std::function<double(double)> const& cdf,
                         double alpha = 0.01) {
  std::size_t const n = samples.size();
  if (n < 100) throw InsufficientSamples("KS test needs at least 100 samples");
  std::sort(samples.begin(), samples.end());
  double d = 0.0;
  double const nn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double const f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / nn - f, f - static_cast<double>(i) / nn});
  }
  double const threshold = ks_critical_constant(alpha) / std::sqrt(nn);
  return {GofKind::ks, d, threshold, d < threshold, n, 0};
}

/// Two-sample Kolmogorov-Smirnov test. Ties are handled by stepping both
/// empirical CDFs past every copy of a value before comparing.
inline GofResult ks_two_sample(std::vector<double> a, std::vector<double> b, double alpha = 0.01) {
  if (a.size() < 100 || b.size() < 100) throw InsufficientSamples("two-sample KS needs 100 samples per side");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double const na = static_cast<double>(a.size());
  double const nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double const v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  double const threshold = ks_critical_constant(alpha) * std::sqrt((na + nb) / (na * nb));
  return {GofKind::ks_two_sample, d, threshold, d < threshold, a.size() + b.size(), 0};
}

inline double chi_square_quantile(std::size_t dof, double alpha) {
  return boost::math::quantile(boost::math::chi_squared(static_cast<double>(dof)), 1.0 - alpha);
}

/// Pearson goodness-of-fit test of observed counts against a pmf. Cells with
/// zero probability are dropped when empty and fail the test otherwise.
inline GofResult chi_square_test(std::span<std::uint64_t const> counts, std::span<double const> pmf,
                                 double alpha = 0.01) {
  if (counts.size() != pmf.size()) throw DomainError("counts and pmf differ in length");
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  double stat = 0.0;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    double const expected = static_cast<double>(total) * pmf[i];
    if (pmf[i] <= 0.0) {
      if (counts[i] > 0) stat = std::numeric_limits<double>::infinity();
      continue;
    }
    if (expected < 5.0) throw LowExpectedCount("chi-square cell with expected count below 5");
    double const diff = static_cast<double>(counts[i]) - expected;
    stat += diff * diff / expected;
    ++cells;
  }
  if (cells < 2) throw DomainError("chi-square test needs at least two cells with positive probability");
  std::size_t const dof = cells - 1;
  double const threshold = chi_square_quantile(dof, alpha);
  return {GofKind::chi_square, stat, threshold, stat < threshold, static_cast<std::size_t>(total), dof};
}

/// Two-sample chi-square homogeneity test on count vectors over the same
/// categories. Trailing categories are pooled until every pooled cell has an
/// expected count of at least 5 in both samples.
inline GofResult chi_square_homogeneity(std::span<std::uint64_t const> a, std::span<std::uint64_t const> b,
                                        double alpha = 0.01) {
  std::size_t const cats = std::max(a.size(), b.size());
  auto at = [](std::span<std::uint64_t const> v, std::size_t i) { return i < v.size() ? v[i] : 0; };
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < cats; ++i) {
    na += static_cast<double>(at(a, i));
    nb += static_cast<double>(at(b, i));
  }
  if (na == 0.0 || nb == 0.0) throw InsufficientSamples("homogeneity test needs two nonempty samples");
  double const total = na + nb;

  std::vector<std::pair<double, double>> pooled;
  double ca = 0.0;
  double cb = 0.0;
  for (std::size_t i = 0; i < cats; ++i) {
    ca += static_cast<double>(at(a, i));
    cb += static_cast<double>(at(b, i));
    double const col = ca + cb;
    if (col * std::min(na, nb) / total >= 5.0) {
      pooled.emplace_back(ca, cb);
      ca = cb = 0.0;
    }
  }
  if (ca + cb > 0.0) {
    if (pooled.empty()) throw LowExpectedCount("homogeneity test has too few observations");
    pooled.back().first += ca;
    pooled.back().second += cb;
  }
  if (pooled.size() < 2) throw LowExpectedCount("homogeneity test needs at least two pooled cells");

  double stat = 0.0;
  for (auto const& [oa, ob] : pooled) {
    double const col = oa + ob;
    double const ea = col * na / total;
    double const eb = col * nb / total;
    stat += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
  }
  std::size_t const dof = pooled.size() - 1;
  double const threshold = chi_square_quantile(dof, alpha);
  return {GofKind::chi_square_homogeneity, stat, threshold, stat < threshold,
          static_cast<std::size_t>(total), dof};
}

/// Regularised incomplete beta I_x(a, b) for positive integer a, b, via
/// I_x(a, b) = P[Binomial(a + b - 1, x) >= a].
inline double beta_cdf_integer(double x, unsigned a, unsigned b) {
  if (a == 0 || b == 0) throw DomainError("beta parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  unsigned const m = a + b - 1;
  double acc = 0.0;
  double binom = 1.0;  // C(m, j), built incrementally
  for (unsigned j = 0; j <= m; ++j) {
    if (j > 0) binom = binom * static_cast<double>(m - j + 1) / static_cast<double>(j);
    if (j >= a) acc += binom * std::pow(x, j) * std::pow(1.0 - x, m - j);
  }
  return std::clamp(acc, 0.0, 1.0);
}

}  // namespace recode
