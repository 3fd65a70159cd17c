#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "recode/error.hpp"

namespace recode {

/// Growable sequence of bits, packed most-significant-bit first within each
/// byte. The final byte is zero-padded; size() is the exact bit length.
class BitString {
public:
  BitString() = default;

  /// Parses a string of '0' / '1' characters.
  static BitString from_string(std::string_view text) {
    BitString out;
    for (char ch : text) {
      if (ch != '0' && ch != '1') throw DomainError("bit string literal must contain only 0 and 1");
      out.push_back(ch == '1');
    }
    return out;
  }

  /// Wraps packed bytes; `bit_length` must not exceed 8 * bytes.size().
  static BitString from_bytes(std::span<std::uint8_t const> bytes, std::size_t bit_length) {
    if (bit_length > 8 * bytes.size()) throw DomainError("bit length exceeds byte buffer");
    BitString out;
    out.bytes_.assign(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>((bit_length + 7) / 8));
    out.length_ = bit_length;
    if (bit_length % 8 != 0) out.bytes_.back() &= static_cast<std::uint8_t>(0xff00u >> (bit_length % 8));
    return out;
  }

  std::size_t size() const noexcept { return length_; }
  bool empty() const noexcept { return length_ == 0; }
  std::span<std::uint8_t const> bytes() const noexcept { return bytes_; }

  bool operator[](std::size_t i) const noexcept { return (bytes_[i / 8] >> (7 - i % 8)) & 1u; }

  void push_back(bool bit) {
    if (length_ % 8 == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (length_ % 8));
    ++length_;
  }

  /// Appends the low `width` bits of `value`, most significant first.
  void append_bits(std::uint64_t value, unsigned width) {
    for (unsigned i = width; i-- > 0;) push_back((value >> i) & 1u);
  }

  void append(BitString const& other) {
    for (std::size_t i = 0; i < other.size(); ++i) push_back(other[i]);
  }

  void flip(std::size_t i) { bytes_[i / 8] ^= static_cast<std::uint8_t>(0x80u >> (i % 8)); }

  bool is_prefix_of(BitString const& other) const noexcept {
    if (length_ > other.length_) return false;
    for (std::size_t i = 0; i < length_; ++i)
      if ((*this)[i] != other[i]) return false;
    return true;
  }

  std::string to_string() const {
    std::string out;
    out.reserve(length_);
    for (std::size_t i = 0; i < length_; ++i) out.push_back((*this)[i] ? '1' : '0');
    return out;
  }

  friend bool operator==(BitString const& a, BitString const& b) noexcept {
    return a.length_ == b.length_ && a.bytes_ == b.bytes_;
  }

private:
  std::vector<std::uint8_t> bytes_;
  std::size_t length_ = 0;
};

inline BitString concat(BitString a, BitString const& b) {
  a.append(b);
  return a;
}

/// Read position over a BitString. Invariant: 0 <= position <= length.
class BitCursor {
public:
  BitCursor() = default;
  explicit BitCursor(std::size_t position) noexcept : position_(position) {}

  std::size_t position() const noexcept { return position_; }
  std::size_t remaining(BitString const& bits) const noexcept { return bits.size() - position_; }
  bool at_end(BitString const& bits) const noexcept { return position_ >= bits.size(); }

  bool read_bit(BitString const& bits) {
    if (position_ >= bits.size()) throw TruncationError("bit string ended mid-codeword");
    return bits[position_++];
  }

  std::uint64_t read_bits(BitString const& bits, unsigned width) {
    if (remaining(bits) < width) throw TruncationError("bit string ended mid-codeword");
    std::uint64_t value = 0;
    for (unsigned i = 0; i < width; ++i) value = (value << 1) | (bits[position_++] ? 1u : 0u);
    return value;
  }

  /// Bit at offset `ahead` from the cursor, or 0 past the end. Does not move.
  bool peek_or_zero(BitString const& bits, std::size_t ahead) const noexcept {
    std::size_t const i = position_ + ahead;
    return i < bits.size() && bits[i];
  }

  void advance(std::size_t n) noexcept { position_ += n; }

private:
  std::size_t position_ = 0;
};

}  // namespace recode
