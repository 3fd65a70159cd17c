#pragma once

// Runtime dispatch over mechanisms and codecs.
//
// The templated samplers and quantisers are what the library is made of;
// this layer picks one of them from ids read off the command line or a
// container header and exposes a uniform per-record encode/decode.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "recode/bits.hpp"
#include "recode/dither.hpp"
#include "recode/error.hpp"
#include "recode/models.hpp"
#include "recode/selection.hpp"

namespace recode {

/// Wire identifier of each codec in the container header.
enum class Codec : std::uint8_t { rejection = 1, pfr = 2, dq = 3, lq = 4 };

inline std::string_view to_string(Codec codec) noexcept {
  switch (codec) {
    case Codec::rejection: return "rejection";
    case Codec::pfr: return "pfr";
    case Codec::dq: return "dq";
    case Codec::lq: return "lq";
  }
  return "?";
}

inline std::optional<Codec> parse_codec(std::string_view name) {
  for (Codec c : {Codec::rejection, Codec::pfr, Codec::dq, Codec::lq})
    if (name == to_string(c)) return c;
  return std::nullopt;
}

inline bool is_selection(Codec codec) noexcept { return codec == Codec::rejection || codec == Codec::pfr; }

inline SelectionAlgorithm selection_algorithm(Codec codec) {
  if (!is_selection(codec)) throw DomainError("not a selection codec");
  return codec == Codec::rejection ? SelectionAlgorithm::rejection : SelectionAlgorithm::pfr;
}

/// X ~ N(0, sigma^2) with unit-width uniform additive noise.
struct GaussianUniformParams {
  double sigma = 1.0;
};

using Mechanism =
    std::variant<CategoricalMechanism, GaussianGaussianMechanism, UniformAdditiveMechanism, GaussianUniformParams>;

inline MechanismId mechanism_id(Mechanism const& mech) noexcept {
  switch (mech.index()) {
    case 0: return MechanismId::categorical;
    case 1: return MechanismId::gaussian_gaussian;
    case 2: return MechanismId::uniform_additive;
    default: return MechanismId::gaussian_uniform;
  }
}

inline std::string_view mechanism_name(MechanismId id) noexcept {
  switch (id) {
    case MechanismId::categorical: return "categorical";
    case MechanismId::gaussian_gaussian: return "gaussian-gaussian";
    case MechanismId::uniform_additive: return "uniform-additive";
    case MechanismId::gaussian_uniform: return "gaussian-uniform";
  }
  return "?";
}

inline std::optional<MechanismId> parse_mechanism_id(std::string_view name) {
  for (auto id : {MechanismId::categorical, MechanismId::gaussian_gaussian, MechanismId::uniform_additive,
                  MechanismId::gaussian_uniform})
    if (name == mechanism_name(id)) return id;
  return std::nullopt;
}

/// Which codecs realise which mechanism exactly.
///
/// Selection codecs need a density ratio, which the Gaussian-uniform pair
/// does not expose; quantisers need additive noise, which rules out the
/// categorical channel; dq only produces uniform noise.
inline bool compatible(MechanismId mech, Codec codec) noexcept {
  switch (mech) {
    case MechanismId::categorical: return is_selection(codec);
    case MechanismId::gaussian_gaussian: return codec != Codec::dq;
    case MechanismId::uniform_additive: return true;
    case MechanismId::gaussian_uniform: return !is_selection(codec);
  }
  return false;
}

/// Quantiser view of a mechanism; throws for the categorical channel.
inline AdditiveUnimodalMechanism additive_view(Mechanism const& mech) {
  return std::visit(
      [](auto const& m) -> AdditiveUnimodalMechanism {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CategoricalMechanism>) {
          throw DomainError("the categorical mechanism has no additive-noise form");
        } else if constexpr (std::is_same_v<T, GaussianUniformParams>) {
          return gaussian_uniform(m.sigma);
        } else {
          return as_additive(m);
        }
      },
      mech);
}

/// Calls f with the concrete ChannelModel; throws for mechanisms without one.
template <typename F>
decltype(auto) with_channel_model(Mechanism const& mech, F&& f) {
  return std::visit(
      [&](auto const& m) -> decltype(f(std::declval<UniformAdditiveMechanism const&>())) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GaussianUniformParams>) {
          throw DomainError("the gaussian-uniform mechanism has no density ratio; use dq or lq");
        } else {
          return f(m);
        }
      },
      mech);
}

/// One draw from the mechanism's source P_X.
template <VariateSource S>
double sample_source(Mechanism const& mech, S& stream) {
  return std::visit(
      [&](auto const& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GaussianUniformParams>) {
          return m.sigma * stream.next_gaussian();
        } else {
          return m.source_sample(stream);
        }
      },
      mech);
}

/// Short label such as "uniform-additive(L=16)" for reports.
inline std::string describe(Mechanism const& mech) {
  auto num = [](double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (s.back() == '.') s.pop_back();
    return s;
  };
  return std::visit(
      [&](auto const& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CategoricalMechanism>) {
          return "categorical(" + std::to_string(m.source_size()) + "x" + std::to_string(m.alphabet_size()) + ")";
        } else if constexpr (std::is_same_v<T, GaussianGaussianMechanism>) {
          return "gaussian-gaussian(sigma=" + num(m.sigma()) + ",rho=" + num(m.rho()) + ")";
        } else if constexpr (std::is_same_v<T, UniformAdditiveMechanism>) {
          return "uniform-additive(L=" + std::to_string(m.levels()) + ")";
        } else {
          return "gaussian-uniform(sigma=" + num(m.sigma) + ")";
        }
      },
      mech);
}

/// One mechanism and one codec, checked for compatibility up front.
class RecordCodec {
public:
  RecordCodec(Mechanism mech, Codec codec, Budget budget = {})
      : mech_(std::move(mech)), codec_(codec), budget_(budget) {
    if (!compatible(mechanism_id(mech_), codec_))
      throw DomainError(std::string(to_string(codec_)) + " cannot realise the " +
                        std::string(mechanism_name(mechanism_id(mech_))) + " mechanism");
    if (!is_selection(codec_)) additive_ = additive_view(mech_);
  }

  Mechanism const& mechanism() const noexcept { return mech_; }
  Codec codec() const noexcept { return codec_; }
  Budget const& budget() const noexcept { return budget_; }

  /// Bits for one record, plus the number of proposals examined (0 for
  /// quantisers).
  std::pair<BitString, std::uint64_t> encode(double x, std::uint64_t seed, std::uint64_t substream) const {
    if (is_selection(codec_)) {
      return with_channel_model(mech_, [&](auto const& m) {
        auto enc = selection_encode_detailed(m, x, seed, substream, selection_algorithm(codec_), budget_);
        return std::pair{std::move(enc.bits), enc.outcome.steps_examined};
      });
    }
    if (codec_ == Codec::dq) return {dq_encode(additive_->source, x, seed, substream), 0};
    return {lq_encode(additive_->source, additive_->noise, x, seed, substream), 0};
  }

  double decode(BitString const& bits, BitCursor& cursor, std::uint64_t seed, std::uint64_t substream) const {
    if (is_selection(codec_)) {
      return with_channel_model(mech_, [&](auto const& m) {
        return selection_decode(m, bits, cursor, seed, substream, selection_algorithm(codec_));
      });
    }
    if (codec_ == Codec::dq) return dq_decode(additive_->source, bits, cursor, seed, substream);
    return lq_decode(additive_->source, additive_->noise, bits, cursor, seed, substream);
  }

private:
  Mechanism mech_;
  Codec codec_;
  Budget budget_;
  std::optional<AdditiveUnimodalMechanism> additive_;
};

}  // namespace recode
