#pragma once

// Elias gamma and delta codes for positive integers.

#include <bit>
#include <cmath>
#include <cstdint>

#include "recode/bits.hpp"
#include "recode/error.hpp"

namespace recode {

namespace detail {

inline unsigned floor_log2(std::uint64_t k) noexcept { return 63u - static_cast<unsigned>(std::countl_zero(k)); }

inline void write_gamma(BitString& out, std::uint64_t k) {
  unsigned const width = floor_log2(k);
  out.append_bits(0, width);
  out.append_bits(k, width + 1);
}

inline void write_delta(BitString& out, std::uint64_t k) {
  unsigned const width = floor_log2(k);
  write_gamma(out, width + 1);
  out.append_bits(k, width);  // mantissa without the leading one
}

}  // namespace detail

/// Gamma code: floor(lb k) zeros followed by the binary form of k.
/// Length is 2 * floor(lb k) + 1.
inline BitString elias_gamma_encode(std::int64_t k) {
  if (k <= 0) throw DomainError("Elias gamma code is defined for k >= 1");
  BitString out;
  detail::write_gamma(out, static_cast<std::uint64_t>(k));
  return out;
}

inline std::uint64_t elias_gamma_decode(BitString const& bits, BitCursor& cursor) {
  unsigned zeros = 0;
  while (!cursor.read_bit(bits)) {
    if (++zeros > 63) throw MalformedCodeword("gamma prefix longer than 63 zeros");
  }
  return (std::uint64_t{1} << zeros) | cursor.read_bits(bits, zeros);
}

/// Delta code: gamma(number of binary digits of k), then k without its
/// leading one. Length is at most lb k + 2 lb(1 + lb k) + 1.
inline BitString elias_delta_encode(std::int64_t k) {
  if (k <= 0) throw DomainError("Elias delta code is defined for k >= 1");
  BitString out;
  detail::write_delta(out, static_cast<std::uint64_t>(k));
  return out;
}

inline std::uint64_t elias_delta_decode(BitString const& bits, BitCursor& cursor) {
  std::uint64_t const digits = elias_gamma_decode(bits, cursor);
  if (digits > 64) throw MalformedCodeword("delta length field exceeds 64 bits");
  auto const width = static_cast<unsigned>(digits - 1);
  std::uint64_t const mantissa = cursor.read_bits(bits, width);
  return (std::uint64_t{1} << width) | mantissa;
}

/// Exact codeword length of elias_delta_encode(k), without building it.
inline std::size_t elias_delta_length(std::uint64_t k) {
  if (k == 0) throw DomainError("Elias delta code is defined for k >= 1");
  unsigned const width = detail::floor_log2(k);
  return 2 * detail::floor_log2(width + 1) + 1 + width;
}

/// Upper bound lb k + 2 lb(1 + lb k) + 1 on the delta codeword length.
inline double elias_delta_length_bound(double k) {
  double const lk = std::log2(k);
  return lk + 2.0 * std::log2(1.0 + lk) + 1.0;
}

}  // namespace recode
