#pragma once

// Coding problems: a source P_X, a channel P_{Y|X}, the marginal P_Y used as
// proposal, and the density ratio r_x = dP_{Y|X=x} / dP_Y.
//
// Inputs and outputs are carried as doubles throughout; categorical symbols
// are the integers 0, 1, ... stored exactly.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "recode/error.hpp"
#include "recode/random.hpp"
#include "recode/smsu.hpp"

namespace recode {

/// Wire identifier of each concrete mechanism in the container header.
enum class MechanismId : std::uint8_t {
  categorical = 1,
  gaussian_gaussian = 2,
  uniform_additive = 3,
  gaussian_uniform = 4,
};

/// The contract every selection sampler relies on.
template <typename M>
concept ChannelModel = requires(M const m, DeterministicStream& s, double x, double y) {
  { m.source_sample(s) } -> std::convertible_to<double>;
  { m.marginal_sample(s) } -> std::convertible_to<double>;
  { m.density_ratio(x, y) } -> std::convertible_to<double>;
  { m.ratio_sup(x) } -> std::convertible_to<double>;
  { m.conditional_cdf(x, y) } -> std::convertible_to<double>;
  { m.mutual_information() } -> std::convertible_to<std::optional<double>>;
};

namespace detail {

inline std::size_t symbol_index(double v, std::size_t alphabet, char const* what) {
  if (!(v >= 0.0) || v != std::floor(v) || v >= static_cast<double>(alphabet))
    throw DomainError(std::string(what) + " is not a valid symbol index");
  return static_cast<std::size_t>(v);
}

/// Inverse-CDF draw of an index from a probability vector; one uniform.
template <VariateSource S>
std::size_t sample_index(std::vector<double> const& pmf, S& stream) {
  double const u = stream.next_uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    acc += pmf[i];
    if (u < acc) return i;
  }
  // Rounding left the cumulative sum just below one; fall back to the last
  // symbol with positive mass.
  for (std::size_t i = pmf.size(); i-- > 0;)
    if (pmf[i] > 0.0) return i;
  return pmf.size() - 1;
}

}  // namespace detail

/// Finite-alphabet mechanism with exact marginal.
class CategoricalMechanism {
public:
  CategoricalMechanism(std::vector<double> source_pmf, std::vector<std::vector<double>> channel_rows)
      : source_pmf_(std::move(source_pmf)), rows_(std::move(channel_rows)) {
    if (source_pmf_.empty() || rows_.size() != source_pmf_.size())
      throw DomainError("categorical mechanism needs one channel row per source symbol");
    alphabet_ = rows_.front().size();
    if (alphabet_ == 0) throw DomainError("categorical mechanism needs a nonempty output alphabet");
    check_pmf(source_pmf_, "source pmf");
    for (auto const& row : rows_) {
      if (row.size() != alphabet_) throw DomainError("channel rows must share one alphabet size");
      check_pmf(row, "channel row");
    }
    marginal_.assign(alphabet_, 0.0);
    for (std::size_t x = 0; x < rows_.size(); ++x)
      for (std::size_t y = 0; y < alphabet_; ++y) marginal_[y] += source_pmf_[x] * rows_[x][y];
  }

  /// Channel whose every row equals the marginal: the degenerate, zero-rate case.
  static CategoricalMechanism degenerate(std::vector<double> pmf) {
    std::vector<std::vector<double>> rows(1, pmf);
    return CategoricalMechanism({1.0}, std::move(rows));
  }

  /// Binary symmetric example: uniform source, rows (1-e, e) / (e, 1-e).
  static CategoricalMechanism binary_symmetric(double flip) {
    return CategoricalMechanism({0.5, 0.5}, {{1.0 - flip, flip}, {flip, 1.0 - flip}});
  }

  MechanismId id() const noexcept { return MechanismId::categorical; }
  std::string name() const { return "categorical"; }

  std::size_t alphabet_size() const noexcept { return alphabet_; }
  std::size_t source_size() const noexcept { return source_pmf_.size(); }
  std::vector<double> const& source_pmf() const noexcept { return source_pmf_; }
  std::vector<std::vector<double>> const& rows() const noexcept { return rows_; }
  std::vector<double> const& marginal() const noexcept { return marginal_; }
  std::vector<double> const& conditional_pmf(double x) const {
    return rows_[detail::symbol_index(x, rows_.size(), "input")];
  }

  double source_cdf(double x) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < source_pmf_.size() && static_cast<double>(i) <= x; ++i) acc += source_pmf_[i];
    return std::min(acc, 1.0);
  }

  template <VariateSource S>
  double source_sample(S& stream) const {
    return static_cast<double>(detail::sample_index(source_pmf_, stream));
  }

  template <VariateSource S>
  double marginal_sample(S& stream) const {
    return static_cast<double>(detail::sample_index(marginal_, stream));
  }

  double density_ratio(double x, double y) const {
    auto const& row = conditional_pmf(x);
    std::size_t const j = detail::symbol_index(y, alphabet_, "output");
    if (marginal_[j] <= 0.0) throw UndefinedRatio("marginal has zero mass at this output");
    return row[j] / marginal_[j];
  }

  double ratio_sup(double x) const {
    auto const& row = conditional_pmf(x);
    double sup = 0.0;
    for (std::size_t j = 0; j < alphabet_; ++j) {
      if (row[j] <= 0.0) continue;
      if (marginal_[j] <= 0.0) throw UnboundedRatio("conditional mass where the marginal has none");
      sup = std::max(sup, row[j] / marginal_[j]);
    }
    return sup;
  }

  double conditional_cdf(double x, double y) const {
    auto const& row = conditional_pmf(x);
    double acc = 0.0;
    for (std::size_t j = 0; j < alphabet_ && static_cast<double>(j) <= y; ++j) acc += row[j];
    return std::min(acc, 1.0);
  }

  /// Exact double sum over the joint pmf, in bits.
  std::optional<double> mutual_information() const {
    double mi = 0.0;
    for (std::size_t x = 0; x < rows_.size(); ++x)
      for (std::size_t y = 0; y < alphabet_; ++y) {
        double const p = source_pmf_[x] * rows_[x][y];
        if (p > 0.0) mi += p * std::log2(rows_[x][y] / marginal_[y]);
      }
    return std::max(mi, 0.0);
  }

  /// Exact E[lb ||r_X||_inf] by summation over the source alphabet.
  double expected_log_ratio_sup_exact() const {
    double acc = 0.0;
    for (std::size_t x = 0; x < rows_.size(); ++x)
      if (source_pmf_[x] > 0.0) acc += source_pmf_[x] * std::log2(ratio_sup(static_cast<double>(x)));
    return acc;
  }

private:
  static void check_pmf(std::vector<double> const& pmf, char const* what) {
    double total = 0.0;
    for (double p : pmf) {
      if (!(p >= 0.0)) throw DomainError(std::string(what) + " has a negative or NaN entry");
      total += p;
    }
    if (std::fabs(total - 1.0) > 1e-12) throw DomainError(std::string(what) + " does not sum to one");
  }

  std::vector<double> source_pmf_;
  std::vector<std::vector<double>> rows_;
  std::vector<double> marginal_;
  std::size_t alphabet_ = 0;
};

/// X ~ N(0, sigma^2), Y | X = x ~ N(x, rho^2); marginal N(0, sigma^2 + rho^2).
class GaussianGaussianMechanism {
public:
  GaussianGaussianMechanism(double sigma, double rho) : sigma_(sigma), rho_(rho) {
    if (!(sigma > 0.0) || !(rho > 0.0)) throw DomainError("Gaussian mechanism needs positive sigma and rho");
  }

  MechanismId id() const noexcept { return MechanismId::gaussian_gaussian; }
  std::string name() const { return "gaussian-gaussian"; }
  double sigma() const noexcept { return sigma_; }
  double rho() const noexcept { return rho_; }
  double marginal_variance() const noexcept { return sigma_ * sigma_ + rho_ * rho_; }

  double source_cdf(double x) const { return normal_cdf(x / sigma_); }

  template <VariateSource S>
  double source_sample(S& stream) const {
    return sigma_ * stream.next_gaussian();
  }

  template <VariateSource S>
  double marginal_sample(S& stream) const {
    return std::sqrt(marginal_variance()) * stream.next_gaussian();
  }

  double log_density_ratio(double x, double y) const {
    double const v = marginal_variance();
    double const d = y - x;
    return 0.5 * std::log(v / (rho_ * rho_)) - d * d / (2.0 * rho_ * rho_) + y * y / (2.0 * v);
  }

  double density_ratio(double x, double y) const { return std::exp(log_density_ratio(x, y)); }

  /// The log-ratio is a concave quadratic in y, maximised at y* = x v / sigma^2,
  /// where it equals 1/2 ln(v / rho^2) + x^2 / (2 sigma^2).
  double log_ratio_sup(double x) const {
    return 0.5 * std::log(marginal_variance() / (rho_ * rho_)) + x * x / (2.0 * sigma_ * sigma_);
  }

  double ratio_sup(double x) const {
    double const sup = std::exp(log_ratio_sup(x));
    if (!std::isfinite(sup)) throw UnboundedRatio("Gaussian density ratio bound overflows");
    return sup;
  }

  double argmax_ratio(double x) const { return x * marginal_variance() / (sigma_ * sigma_); }

  double conditional_cdf(double x, double y) const { return normal_cdf((y - x) / rho_); }

  std::optional<double> mutual_information() const {
    return 0.5 * std::log2(1.0 + sigma_ * sigma_ / (rho_ * rho_));
  }

private:
  double sigma_;
  double rho_;
};

/// X uniform on the integer levels {0, ..., L-1}, Y = X + U with
/// U ~ Unif(-1/2, 1/2). The conditional supports tile the marginal
/// support (-1/2, L - 1/2], so I(X; Y) = lb L exactly.
class UniformAdditiveMechanism {
public:
  explicit UniformAdditiveMechanism(std::int64_t levels) : levels_(levels) {
    if (levels < 1) throw DomainError("uniform additive mechanism needs at least one level");
  }

  MechanismId id() const noexcept { return MechanismId::uniform_additive; }
  std::string name() const { return "uniform-additive"; }
  std::int64_t levels() const noexcept { return levels_; }

  double source_cdf(double x) const {
    double const below = std::clamp(std::floor(x) + 1.0, 0.0, static_cast<double>(levels_));
    return below / static_cast<double>(levels_);
  }

  template <VariateSource S>
  double source_sample(S& stream) const {
    auto const level = static_cast<std::int64_t>(stream.next_uniform() * static_cast<double>(levels_));
    return static_cast<double>(std::min(level, levels_ - 1));
  }

  template <VariateSource S>
  double marginal_sample(S& stream) const {
    return stream.next_uniform() * static_cast<double>(levels_) - 0.5;
  }

  double density_ratio(double x, double y) const {
    check_level(x);
    if (y <= -0.5 || y > static_cast<double>(levels_) - 0.5)
      throw UndefinedRatio("output outside the marginal support");
    return (y > x - 0.5 && y <= x + 0.5) ? static_cast<double>(levels_) : 0.0;
  }

  double ratio_sup(double x) const {
    check_level(x);
    return static_cast<double>(levels_);
  }

  double conditional_cdf(double x, double y) const { return std::clamp(y - x + 0.5, 0.0, 1.0); }

  std::optional<double> mutual_information() const { return std::log2(static_cast<double>(levels_)); }

private:
  void check_level(double x) const {
    detail::symbol_index(x, static_cast<std::size_t>(levels_), "input level");
  }

  std::int64_t levels_;
};

/// One-dimensional source used by the quantiser codes.
class ScalarSource {
public:
  enum class Kind { gaussian, discrete_uniform };

  static ScalarSource gaussian(double sigma) {
    if (!(sigma > 0.0)) throw DomainError("Gaussian source needs positive sigma");
    return ScalarSource(Kind::gaussian, sigma, 0);
  }

  static ScalarSource discrete_uniform(std::int64_t levels) {
    if (levels < 1) throw DomainError("discrete uniform source needs at least one level");
    return ScalarSource(Kind::discrete_uniform, 0.0, levels);
  }

  Kind kind() const noexcept { return kind_; }
  double sigma() const noexcept { return sigma_; }
  std::int64_t levels() const noexcept { return levels_; }

  double cdf(double t) const {
    if (kind_ == Kind::gaussian) return normal_cdf(t / sigma_);
    double const below = std::clamp(std::floor(t) + 1.0, 0.0, static_cast<double>(levels_));
    return below / static_cast<double>(levels_);
  }

  template <VariateSource S>
  double sample(S& stream) const {
    if (kind_ == Kind::gaussian) return sigma_ * stream.next_gaussian();
    auto const level = static_cast<std::int64_t>(stream.next_uniform() * static_cast<double>(levels_));
    return static_cast<double>(std::min(level, levels_ - 1));
  }

  /// Interval holding all but a negligible fraction of the mass; used as the
  /// starting bracket when decoding quantiser indices.
  std::pair<double, double> typical_range() const {
    if (kind_ == Kind::gaussian) return {-9.0 * sigma_, 9.0 * sigma_};
    return {0.0, static_cast<double>(levels_ - 1)};
  }

private:
  ScalarSource(Kind kind, double sigma, std::int64_t levels) : kind_(kind), sigma_(sigma), levels_(levels) {}

  Kind kind_;
  double sigma_;
  std::int64_t levels_;
};

/// Y = X + eps with eps independent of X, unimodal, and given through an
/// explicit SMSU representation. Mutual information is only reported when
/// the factory knows it in closed form.
struct AdditiveUnimodalMechanism {
  ScalarSource source;
  SmsuRepresentation noise;
  std::optional<double> known_mutual_information;

  double source_cdf(double x) const { return source.cdf(x); }
  double conditional_cdf(double x, double y) const { return noise.noise_cdf(y - x); }
  std::optional<double> mutual_information() const { return known_mutual_information; }
};

/// Quantiser view of the uniform additive mechanism (noise S = 1, b = 0).
inline AdditiveUnimodalMechanism as_additive(UniformAdditiveMechanism const& mech) {
  return {ScalarSource::discrete_uniform(mech.levels()), uniform_smsu(), mech.mutual_information()};
}

/// Quantiser view of the Gaussian mechanism (noise rho * 2 chi(3) * U).
inline AdditiveUnimodalMechanism as_additive(GaussianGaussianMechanism const& mech) {
  return {ScalarSource::gaussian(mech.sigma()), gaussian_smsu(mech.rho()), mech.mutual_information()};
}

/// Gaussian source with unit-width uniform noise; the natural dithered
/// quantiser setting for continuous inputs. I(X; Y) has no closed form.
inline AdditiveUnimodalMechanism gaussian_uniform(double sigma) {
  return {ScalarSource::gaussian(sigma), uniform_smsu(), std::nullopt};
}

/// Monte Carlo estimate of E[lb ||r_X||_inf] with its standard error.
struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

template <typename M, VariateSource S>
MeanEstimate expected_log_ratio_sup(M const& mech, S& stream, std::size_t n_samples) {
  if (n_samples == 0) throw DomainError("expected_log_ratio_sup needs at least one sample");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    double const v = std::log2(mech.ratio_sup(mech.source_sample(stream)));
    sum += v;
    sum_sq += v * v;
  }
  double const n = static_cast<double>(n_samples);
  double const mean = sum / n;
  double const var = n_samples > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
  return {mean, std::sqrt(var / n), n_samples};
}

}  // namespace recode
