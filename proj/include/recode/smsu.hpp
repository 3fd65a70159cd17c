#pragma once

// Scale mixtures of shifted uniforms: noise written as S * (U + b(S)) with
// U ~ Unif(-1/2, 1/2) and S > 0 drawn independently of U.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "recode/random.hpp"

namespace recode {

struct SmsuRepresentation {
  std::string name;
  /// Draws the scale S; must return a strictly positive value.
  std::function<double(DeterministicStream&)> scale_sampler;
  /// Offset b(s).
  std::function<double(double)> offset;
  /// CDF of the represented noise, for verification only.
  std::function<double(double)> noise_cdf;
};

/// Gaussian noise N(0, scale^2): S = scale * 2 * chi(3), b = 0.
///
/// The chi(3) variate is the norm of three stream Gaussians, so each scale
/// draw consumes three raw draws.
inline SmsuRepresentation gaussian_smsu(double scale = 1.0) {
  return SmsuRepresentation{
      .name = "gaussian",
      .scale_sampler =
          [scale](DeterministicStream& stream) {
            double const g1 = stream.next_gaussian();
            double const g2 = stream.next_gaussian();
            double const g3 = stream.next_gaussian();
            return scale * 2.0 * std::sqrt(g1 * g1 + g2 * g2 + g3 * g3);
          },
      .offset = [](double) { return 0.0; },
      .noise_cdf = [scale](double t) { return normal_cdf(t / scale); },
  };
}

/// Uniform noise on (-width/2, width/2]: constant scale, no offset, no draws.
inline SmsuRepresentation uniform_smsu(double width = 1.0) {
  return SmsuRepresentation{
      .name = "uniform",
      .scale_sampler = [width](DeterministicStream&) { return width; },
      .offset = [](double) { return 0.0; },
      .noise_cdf = [width](double t) { return std::clamp(t / width + 0.5, 0.0, 1.0); },
  };
}

}  // namespace recode
