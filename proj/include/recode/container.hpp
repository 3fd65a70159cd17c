#pragma once

// Container format for a batch of encoded records.
//
//   offset  size  field
//   0       4     magic "RECB"
//   4       1     version (1)
//   5       1     mechanism id
//   6       var   mechanism parameters
//   .       1     codec id
//   .       8     seed
//   .       8     record count
//   .       8     payload length in bits
//   .       var   payload, ceil(bits / 8) bytes, MSB first, zero padded
//
// Integers are unsigned little-endian, reals are IEEE-754 binary64 stored
// little-endian. Parameter blocks:
//   categorical        u64 inputs, u64 alphabet, f64 pmf[inputs], f64 rows[inputs * alphabet]
//   gaussian-gaussian  f64 sigma, f64 rho
//   uniform-additive   u64 levels
//   gaussian-uniform   f64 sigma
//
// Record i is coded with substream i of the header seed, so a damaged record
// cannot shift the randomness of any other record.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "recode/bits.hpp"
#include "recode/codec.hpp"
#include "recode/error.hpp"

namespace recode {

inline constexpr std::array<std::uint8_t, 4> kContainerMagic = {'R', 'E', 'C', 'B'};
inline constexpr std::uint8_t kContainerVersion = 1;

/// A codec failure while processing one record.
class RecordError : public Error {
public:
  RecordError(std::uint64_t record, std::string const& what)
      : Error("record " + std::to_string(record) + ": " + what), record_(record) {}

  std::uint64_t record() const noexcept { return record_; }

private:
  std::uint64_t record_;
};

struct ContainerHeader {
  Mechanism mechanism = UniformAdditiveMechanism(1);
  Codec codec = Codec::pfr;
  std::uint64_t seed = 0;
  std::uint64_t record_count = 0;
  std::uint64_t payload_bits = 0;
};

struct Container {
  ContainerHeader header;
  BitString payload;
  /// Bit offset of each record within the payload; filled by the encoder.
  std::vector<std::uint64_t> record_offsets;
};

namespace detail {

class ByteWriter {
public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(std::span<std::uint8_t const> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
public:
  explicit ByteReader(std::span<std::uint8_t const> in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{in_[pos_++]} << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return in_.size() - pos_; }
  std::span<std::uint8_t const> rest() const noexcept { return in_.subspan(pos_); }

private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw FormatError("container header is truncated");
  }

  std::span<std::uint8_t const> in_;
  std::size_t pos_ = 0;
};

// Guards the allocation sizes read from a categorical parameter block.
inline constexpr std::uint64_t kMaxCategoricalEntries = std::uint64_t{1} << 24;

inline void write_parameters(ByteWriter& w, Mechanism const& mech) {
  std::visit(
      [&](auto const& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CategoricalMechanism>) {
          w.u64(m.source_size());
          w.u64(m.alphabet_size());
          for (double p : m.source_pmf()) w.f64(p);
          for (auto const& row : m.rows())
            for (double p : row) w.f64(p);
        } else if constexpr (std::is_same_v<T, GaussianGaussianMechanism>) {
          w.f64(m.sigma());
          w.f64(m.rho());
        } else if constexpr (std::is_same_v<T, UniformAdditiveMechanism>) {
          w.u64(static_cast<std::uint64_t>(m.levels()));
        } else {
          w.f64(m.sigma);
        }
      },
      mech);
}

inline Mechanism read_parameters(ByteReader& r, std::uint8_t id) {
  // Parameter validation lives in the mechanism constructors; re-badge their
  // complaints as format errors since the bytes came from a file.
  try {
    switch (static_cast<MechanismId>(id)) {
      case MechanismId::categorical: {
        std::uint64_t const inputs = r.u64();
        std::uint64_t const alphabet = r.u64();
        if (inputs == 0 || alphabet == 0 || inputs > kMaxCategoricalEntries || alphabet > kMaxCategoricalEntries ||
            inputs * alphabet > kMaxCategoricalEntries || (inputs + inputs * alphabet) * 8 > r.remaining())
          throw FormatError("categorical parameter block has implausible dimensions");
        std::vector<double> pmf(inputs);
        for (auto& p : pmf) p = r.f64();
        std::vector<std::vector<double>> rows(inputs, std::vector<double>(alphabet));
        for (auto& row : rows)
          for (auto& p : row) p = r.f64();
        return CategoricalMechanism(std::move(pmf), std::move(rows));
      }
      case MechanismId::gaussian_gaussian: {
        double const sigma = r.f64();
        double const rho = r.f64();
        return GaussianGaussianMechanism(sigma, rho);
      }
      case MechanismId::uniform_additive: {
        std::uint64_t const levels = r.u64();
        if (levels > (std::uint64_t{1} << 52)) throw FormatError("uniform-additive level count too large");
        return UniformAdditiveMechanism(static_cast<std::int64_t>(levels));
      }
      case MechanismId::gaussian_uniform: {
        double const sigma = r.f64();
        if (!(sigma > 0.0) || !std::isfinite(sigma)) throw FormatError("gaussian-uniform sigma must be positive");
        return GaussianUniformParams{sigma};
      }
    }
  } catch (DomainError const& e) {
    throw FormatError(std::string("invalid mechanism parameters: ") + e.what());
  }
  throw FormatError("unknown mechanism id " + std::to_string(id));
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize(Container const& c) {
  if (c.payload.size() != c.header.payload_bits) throw DomainError("payload length disagrees with the header");
  detail::ByteWriter w;
  for (auto b : kContainerMagic) w.u8(b);
  w.u8(kContainerVersion);
  w.u8(static_cast<std::uint8_t>(mechanism_id(c.header.mechanism)));
  detail::write_parameters(w, c.header.mechanism);
  w.u8(static_cast<std::uint8_t>(c.header.codec));
  w.u64(c.header.seed);
  w.u64(c.header.record_count);
  w.u64(c.header.payload_bits);
  w.bytes(c.payload.bytes());
  return w.take();
}

/// Parses and validates a container. Magic and version are checked before
/// anything else is read.
inline Container deserialize(std::span<std::uint8_t const> file) {
  detail::ByteReader r(file);
  if (file.size() < kContainerMagic.size() || !std::equal(kContainerMagic.begin(), kContainerMagic.end(), file.begin()))
    throw FormatError("not a RECB container (bad magic)");
  for (std::size_t i = 0; i < kContainerMagic.size(); ++i) r.u8();
  if (std::uint8_t const v = r.u8(); v != kContainerVersion)
    throw FormatError("unsupported container version " + std::to_string(v));

  Container c;
  std::uint8_t const mech_id = r.u8();
  c.header.mechanism = detail::read_parameters(r, mech_id);
  std::uint8_t const codec_id = r.u8();
  if (codec_id < 1 || codec_id > 4) throw FormatError("unknown codec id " + std::to_string(codec_id));
  c.header.codec = static_cast<Codec>(codec_id);
  if (!compatible(static_cast<MechanismId>(mech_id), c.header.codec))
    throw FormatError("codec and mechanism in the header are incompatible");
  c.header.seed = r.u64();
  c.header.record_count = r.u64();
  c.header.payload_bits = r.u64();

  std::uint64_t const available = r.remaining();
  if (c.header.payload_bits > 8 * available) throw FormatError("payload is truncated");
  if (available != (c.header.payload_bits + 7) / 8) throw FormatError("trailing bytes after the payload");
  c.payload = BitString::from_bytes(r.rest(), c.header.payload_bits);
  return c;
}

/// Encodes records in order, record i on substream i of `seed`.
inline Container encode_records(RecordCodec const& codec, std::span<double const> records, std::uint64_t seed) {
  Container c;
  c.header = {codec.mechanism(), codec.codec(), seed, records.size(), 0};
  c.record_offsets.reserve(records.size());
  for (std::uint64_t i = 0; i < records.size(); ++i) {
    c.record_offsets.push_back(c.payload.size());
    try {
      c.payload.append(codec.encode(records[i], seed, i).first);
    } catch (Error const& e) {
      throw RecordError(i, e.what());
    }
  }
  c.header.payload_bits = c.payload.size();
  return c;
}

/// Decodes every record of a container. Trailing padding beyond the last
/// record must be absent: the payload length is exact.
inline std::vector<double> decode_records(Container const& c, Budget budget = {}) {
  RecordCodec const codec(c.header.mechanism, c.header.codec, budget);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(c.header.record_count, c.payload.size() + 1)));
  BitCursor cursor;
  for (std::uint64_t i = 0; i < c.header.record_count; ++i) {
    try {
      out.push_back(codec.decode(c.payload, cursor, c.header.seed, i));
    } catch (Error const& e) {
      throw RecordError(i, e.what());
    }
  }
  if (!cursor.at_end(c.payload)) throw FormatError("payload holds bits beyond the last record");
  return out;
}

}  // namespace recode
