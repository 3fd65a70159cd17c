#pragma once

// Shannon-Fano-Elias coding of a single integer under a known CDF.
//
// CDF values are mapped to 64-bit fixed point, G(n) = floor(F(n) * 2^64) in
// [0, 2^64], and all codeword arithmetic is done on those integers. Encoder
// and decoder therefore agree bit for bit as long as they evaluate F to the
// same doubles, and the intervals [G(n-1), G(n)) tile [0, 2^64) exactly.
//
// A symbol with q = G(n) - G(n-1) units of mass gets the codeword made of the
// first l = 65 - floor(lb q) bits of (G(n-1) + q/2) / 2^64, which is
// ceil(-lb pmf(n)) + 1 bits.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>

#include "recode/bits.hpp"
#include "recode/error.hpp"

namespace recode {

using u128 = unsigned __int128;

/// CDF of an integer-valued random variable plus a starting bracket
/// [low, high] outside of which the mass is expected to be negligible.
struct IntegerCdf {
  std::function<double(std::int64_t)> evaluate;
  std::int64_t low = 0;
  std::int64_t high = 0;

  /// F(n) in 64-bit fixed point, clamped to [0, 2^64].
  u128 fixed(std::int64_t n) const {
    double const c = evaluate(n);
    if (!(c > 0.0)) return 0;
    if (c >= 1.0) return u128{1} << 64;
    return static_cast<u128>(static_cast<std::uint64_t>(std::ldexp(c, 64)));
  }

  u128 fixed_below(std::int64_t n) const {
    return n == std::numeric_limits<std::int64_t>::min() ? u128{0} : fixed(n - 1);
  }

  /// pmf(n) in units of 2^-64; zero when clamping left no mass.
  u128 mass(std::int64_t n) const {
    u128 const lo = fixed_below(n);
    u128 const hi = fixed(n);
    return hi > lo ? hi - lo : 0;
  }

  double pmf(std::int64_t n) const { return std::ldexp(static_cast<double>(mass(n)), -64); }
};

namespace detail {

inline unsigned floor_log2_u128(u128 v) noexcept {
  auto const high = static_cast<std::uint64_t>(v >> 64);
  if (high != 0) return 64u + (63u - static_cast<unsigned>(std::countl_zero(high)));
  return 63u - static_cast<unsigned>(std::countl_zero(static_cast<std::uint64_t>(v)));
}

struct SfeCodeword {
  u128 value;
  unsigned length;
};

inline SfeCodeword sfe_codeword(u128 below, u128 mass) {
  unsigned const lg = floor_log2_u128(mass);
  return {(2 * below + mass) >> lg, 65u - lg};
}

inline void append_u128(BitString& out, u128 value, unsigned width) {
  for (unsigned i = width; i-- > 0;) out.push_back(static_cast<bool>((value >> i) & 1u));
}

}  // namespace detail

/// Codeword length ceil(-lb pmf(n)) + 1 for a symbol of the given fixed-point mass.
inline unsigned sfe_length(u128 mass) { return 65u - detail::floor_log2_u128(mass); }

inline BitString sfe_encode(IntegerCdf const& cdf, std::int64_t n) {
  u128 const below = cdf.fixed_below(n);
  u128 const above = cdf.fixed(n);
  if (above <= below) throw ZeroProbabilitySymbol("symbol " + std::to_string(n) + " has probability below 2^-64");
  auto const cw = detail::sfe_codeword(below, above - below);
  BitString out;
  detail::append_u128(out, cw.value, cw.length);
  return out;
}

/// Decodes one symbol by bisection: the target n is the smallest integer with
/// 2 G(n) > V, where V is the next 65 bits at the cursor (zero-padded past the
/// end). The bracket starts at [cdf.low, cdf.high] and grows geometrically.
inline std::int64_t sfe_decode(IntegerCdf const& cdf, BitString const& bits, BitCursor& cursor) {
  u128 probe = 0;
  for (std::size_t i = 0; i < 65; ++i) probe = (probe << 1) | (cursor.peek_or_zero(bits, i) ? 1u : 0u);

  auto above_target = [&](std::int64_t n) { return 2 * cdf.fixed(n) > probe; };
  auto below_target = [&](std::int64_t n) { return 2 * cdf.fixed_below(n) <= probe; };

  constexpr std::int64_t kMaxSpan = std::int64_t{1} << 62;
  std::int64_t lo = std::min(cdf.low, cdf.high);
  std::int64_t hi = std::max(cdf.low, cdf.high);
  for (std::int64_t span = std::max<std::int64_t>(hi - lo, 1); !above_target(hi); span *= 2) {
    if (span > kMaxSpan || hi > std::numeric_limits<std::int64_t>::max() - span)
      throw MalformedCodeword("SFE bracket expansion exceeded 2^62");
    lo = hi;
    hi += span;
  }
  for (std::int64_t span = std::max<std::int64_t>(hi - lo, 1); !below_target(lo); span *= 2) {
    if (span > kMaxSpan || lo < std::numeric_limits<std::int64_t>::min() + span)
      throw MalformedCodeword("SFE bracket expansion exceeded 2^62");
    hi = lo;
    lo -= span;
  }
  // Invariant: below_target(lo) and above_target(hi); find the smallest n
  // in [lo, hi] with above_target(n).
  while (lo < hi) {
    std::int64_t const mid = lo + (hi - lo) / 2;
    if (above_target(mid))
      hi = mid;
    else
      lo = mid + 1;
  }

  u128 const mass = cdf.mass(lo);
  if (mass == 0) throw MalformedCodeword("SFE payload points at a zero-probability symbol");
  auto const cw = detail::sfe_codeword(cdf.fixed_below(lo), mass);
  if (cursor.remaining(bits) < cw.length) throw TruncationError("bit string ended mid-codeword");
  for (unsigned i = 0; i < cw.length; ++i)
    if (cursor.peek_or_zero(bits, i) != static_cast<bool>((cw.value >> (cw.length - 1 - i)) & 1u))
      throw MalformedCodeword("SFE payload does not match any codeword");
  cursor.advance(cw.length);
  return lo;
}

}  // namespace recode
