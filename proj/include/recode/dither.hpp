#pragma once

// Dithered and layered quantiser codes.
//
// Dithered quantisation: with shared dither u ~ Unif(-1/2, 1/2), send
// N = round_half_up(x + u) and reconstruct y = N - u; then y - x is uniform on
// (-1/2, 1/2] whatever x is. Layered quantisation additionally shares a scale
// s from an SMSU representation of the target noise and quantises on the grid
// s * (Z - b(s) - u), which makes y - x distributed as that noise.
//
// N is entropy coded with the Shannon-Fano-Elias coder under the conditional
// law of N given the shared randomness, which both sides can evaluate from
// the source CDF.
//
// Stream draw order is part of the wire contract: layered codes draw the scale
// first (however many raw draws the SMSU sampler needs), then one dither draw.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "recode/bits.hpp"
#include "recode/error.hpp"
#include "recode/models.hpp"
#include "recode/random.hpp"
#include "recode/sfe.hpp"
#include "recode/smsu.hpp"

namespace recode {

/// floor(x + 1/2): halves round towards +infinity.
inline std::int64_t round_half_up(double x) {
  double const r = std::floor(x + 0.5);
  if (!std::isfinite(r) || std::fabs(r) > 0x1.0p62) throw DomainError("value too large to quantise");
  return static_cast<std::int64_t>(r);
}

/// P[N <= n | U = u] = P[X <= n - u + 1/2].
template <typename SourceCdf>
double dq_index_cdf(SourceCdf const& source_cdf, double u, std::int64_t n) {
  return source_cdf(static_cast<double>(n) - u + 0.5);
}

/// P[N <= n | U = u, S = s] = P[X <= s (n - b(s) - u + 1/2)].
template <typename SourceCdf>
double lq_index_cdf(SourceCdf const& source_cdf, double u, double s, double b_of_s, std::int64_t n) {
  return source_cdf(s * (static_cast<double>(n) - b_of_s - u + 0.5));
}

/// Shared randomness and quantised index of one record.
struct DitherRecord {
  std::int64_t index = 0;  // N
  double dither = 0.0;     // u
  double scale = 1.0;      // s
  double offset = 0.0;     // b(s)

  /// Decoder reconstruction s * (N - u).
  double reconstruction() const noexcept { return scale * (static_cast<double>(index) - dither); }
};

struct DitherEncoding {
  BitString bits;
  DitherRecord record;
};

namespace detail {

struct SharedDither {
  double dither;
  double scale;
  double offset;
};

inline SharedDither draw_layered(SmsuRepresentation const& smsu, DeterministicStream& stream) {
  double const s = smsu.scale_sampler(stream);
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("SMSU scale must be positive and finite");
  double const b = smsu.offset(s);
  double const u = stream.next_uniform() - 0.5;
  return {u, s, b};
}

inline std::int64_t clamp_to_index(double v) {
  constexpr double kLimit = 0x1.0p61;
  return static_cast<std::int64_t>(std::clamp(v, -kLimit, kLimit));
}

/// Conditional CDF of the index with a starting bracket derived from the
/// source's typical range, so the decoder never needs x.
inline IntegerCdf index_cdf(ScalarSource const& source, SharedDither const& shared) {
  auto const [a, b] = source.typical_range();
  double const shift = shared.offset + shared.dither;
  return IntegerCdf{
      .evaluate =
          [source, shared](std::int64_t n) {
            return lq_index_cdf([&](double t) { return source.cdf(t); }, shared.dither, shared.scale,
                                shared.offset, n);
          },
      .low = clamp_to_index(std::floor(a / shared.scale + shift)) - 1,
      .high = clamp_to_index(std::ceil(b / shared.scale + shift)) + 1,
  };
}

}  // namespace detail

inline DitherEncoding lq_encode_detailed(ScalarSource const& source, SmsuRepresentation const& smsu, double x,
                                         std::uint64_t seed, std::uint64_t substream) {
  auto stream = new_stream(seed, substream);
  auto const shared = detail::draw_layered(smsu, stream);
  std::int64_t const n = round_half_up(x / shared.scale + shared.offset + shared.dither);
  return {sfe_encode(detail::index_cdf(source, shared), n), {n, shared.dither, shared.scale, shared.offset}};
}

/// Layered quantiser encoder: N = round_half_up(x / s + b(s) + u).
inline BitString lq_encode(ScalarSource const& source, SmsuRepresentation const& smsu, double x,
                           std::uint64_t seed, std::uint64_t substream) {
  return lq_encode_detailed(source, smsu, x, seed, substream).bits;
}

/// Layered quantiser decoder: y = s * (N - u).
inline double lq_decode(ScalarSource const& source, SmsuRepresentation const& smsu, BitString const& bits,
                        BitCursor& cursor, std::uint64_t seed, std::uint64_t substream) {
  auto stream = new_stream(seed, substream);
  auto const shared = detail::draw_layered(smsu, stream);
  std::int64_t const n = sfe_decode(detail::index_cdf(source, shared), bits, cursor);
  return DitherRecord{n, shared.dither, shared.scale, shared.offset}.reconstruction();
}

inline DitherEncoding dq_encode_detailed(ScalarSource const& source, double x, std::uint64_t seed,
                                         std::uint64_t substream) {
  auto stream = new_stream(seed, substream);
  double const u = stream.next_uniform() - 0.5;
  std::int64_t const n = round_half_up(x + u);
  auto const cdf = detail::index_cdf(source, {u, 1.0, 0.0});
  return {sfe_encode(cdf, n), {n, u, 1.0, 0.0}};
}

/// Dithered quantiser encoder: N = round_half_up(x + u), u = next_uniform - 1/2.
inline BitString dq_encode(ScalarSource const& source, double x, std::uint64_t seed, std::uint64_t substream) {
  return dq_encode_detailed(source, x, seed, substream).bits;
}

/// Dithered quantiser decoder: y = N - u, with y - x in (-1/2, 1/2].
inline double dq_decode(ScalarSource const& source, BitString const& bits, BitCursor& cursor, std::uint64_t seed,
                        std::uint64_t substream) {
  auto stream = new_stream(seed, substream);
  double const u = stream.next_uniform() - 0.5;
  std::int64_t const n = sfe_decode(detail::index_cdf(source, {u, 1.0, 0.0}), bits, cursor);
  return static_cast<double>(n) - u;
}

}  // namespace recode
