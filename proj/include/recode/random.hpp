#pragma once

// Shared randomness for encoder and decoder.
//
// A DeterministicStream is a counter-based generator: draw number c of
// substream s under seed k is a pure function of (k, s, c). Two parties that
// agree on the seed can therefore regenerate any record's variates without
// replaying other records.

#include <atomic>
#include <cmath>
#include <concepts>
#include <cstdint>

namespace recode {

namespace detail {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// SplitMix64 output finaliser (Stafford's mix13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t substream) noexcept {
  std::uint64_t const seed_key = mix64(seed + kGoldenGamma);
  return mix64(seed_key ^ mix64(substream * 0xd1342543de82ef95ULL + kGoldenGamma));
}

template <typename T, std::size_t N>
constexpr T horner(T x, T const (&c)[N]) noexcept {
  T acc = c[N - 1];
  for (std::size_t i = N - 1; i-- > 0;) acc = acc * x + c[i];
  return acc;
}

}  // namespace detail

/// Inverse of the standard normal CDF (Wichura's AS241, PPND16).
///
/// Relative accuracy is about 1e-16 over (0, 1). Only sqrt and log are
/// taken from the platform math library.
inline double normal_quantile(double p) noexcept {
  static constexpr double a[] = {3.3871328727963666080e0,  1.3314166789178437745e+2,
                                 1.9715909503065514427e+3, 1.3731693765509461125e+4,
                                 4.5921953931549871457e+4, 6.7265770927008700853e+4,
                                 3.3430575583588128105e+4, 2.5090809287301226727e+3};
  static constexpr double b[] = {1.0,
                                 4.2313330701600911252e+1, 6.8718700749205790830e+2,
                                 5.3941960214247511077e+3, 2.1213794301586595867e+4,
                                 3.9307895800092710610e+4, 2.8729085735721942674e+4,
                                 5.2264952788528545610e+3};
  static constexpr double c[] = {1.42343711074968357734e0,  4.63033784615654529590e0,
                                 5.76949722146069140550e0,  3.64784832476320460504e0,
                                 1.27045825245236838258e0,  2.41780725177450611770e-1,
                                 2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double d[] = {1.0,
                                 2.05319162663775882187e0,  1.67638483018380384940e0,
                                 6.89767334985100004550e-1, 1.48103976427480074590e-1,
                                 1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                 1.05075007164441684324e-9};
  static constexpr double e[] = {6.65790464350110377720e0,  5.46378491116411436990e0,
                                 1.78482653991729133580e0,  2.96560571828504891230e-1,
                                 2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                 2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[] = {1.0,
                                 5.99832206555887937690e-1, 1.36929880922735805310e-1,
                                 1.48753612908506148525e-2, 7.86869131145613259100e-4,
                                 1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                 2.04426310338993978564e-15};

  double const q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    double const r = 0.180625 - q * q;
    return q * detail::horner(r, a) / detail::horner(r, b);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = detail::horner(r, c) / detail::horner(r, d);
  } else {
    r -= 5.0;
    value = detail::horner(r, e) / detail::horner(r, f);
  }
  return q < 0.0 ? -value : value;
}

/// Standard normal CDF.
inline double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace testing {

/// Fault-injection hook: when nonzero, every uniform u is replaced by
/// u^(1 + bias). Used by `recode verify --inject-fault` to prove the
/// statistical suite detects a broken randomness source.
inline std::atomic<double> uniform_bias{0.0};

}  // namespace testing

/// Seeded, substream-indexed source of reproducible variates.
///
/// Every variate consumes exactly one raw 64-bit draw, so counter() equals
/// the number of variates produced so far. Not safe for concurrent use;
/// give each thread (or record) its own substream.
class DeterministicStream {
public:
  DeterministicStream(std::uint64_t seed, std::uint64_t substream) noexcept
      : seed_(seed), substream_(substream), key_(detail::stream_key(seed, substream)) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t substream() const noexcept { return substream_; }
  std::uint64_t counter() const noexcept { return counter_; }

  /// Raw 64-bit draw at the current counter.
  std::uint64_t next_bits() noexcept {
    std::uint64_t const out = detail::mix64(key_ + (counter_ + 1) * detail::kGoldenGamma);
    ++counter_;
    return out;
  }

  /// Uniform on the open interval (0, 1): ((bits >> 12) + 0.5) * 2^-52.
  ///
  /// Every value is an odd multiple of 2^-53, so it is exact, never 0 or 1,
  /// and 1 - u is exact as well.
  double next_uniform() noexcept {
    double const u = (static_cast<double>(next_bits() >> 12) + 0.5) * 0x1.0p-52;
    double const bias = testing::uniform_bias.load(std::memory_order_relaxed);
    return bias == 0.0 ? u : std::pow(u, 1.0 + bias);
  }

  /// Exp(1) by inversion: -ln(1 - u).
  double next_exponential() noexcept { return exponential_from_uniform(next_uniform()); }

  /// N(0, 1) by inversion through normal_quantile.
  double next_gaussian() noexcept { return normal_quantile(next_uniform()); }

  static double exponential_from_uniform(double u) noexcept { return -std::log1p(-u); }

private:
  std::uint64_t seed_;
  std::uint64_t substream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

inline DeterministicStream new_stream(std::uint64_t seed, std::uint64_t substream) noexcept {
  return DeterministicStream(seed, substream);
}

/// Anything the samplers can draw from. DeterministicStream is the canonical
/// model; tests substitute spliced streams to probe stopping-time behaviour.
template <typename S>
concept VariateSource = requires(S s) {
  { s.next_uniform() } -> std::convertible_to<double>;
  { s.next_exponential() } -> std::convertible_to<double>;
  { s.next_gaussian() } -> std::convertible_to<double>;
  { s.counter() } -> std::convertible_to<std::uint64_t>;
};

static_assert(VariateSource<DeterministicStream>);

}  // namespace recode
