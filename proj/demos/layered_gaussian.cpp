// Gaussian channel Y = X + N(0, rho^2) realised by the layered quantiser:
// shared scale and dither, one entropy-coded integer per sample.

#include <cmath>
#include <cstdio>
#include <vector>

#include "recode/recode.hpp"

int main() {
  using namespace recode;
  double const rho = 0.5;
  auto const source = ScalarSource::gaussian(1.0);
  auto const noise = gaussian_smsu(rho);
  std::uint64_t const seed = 99;

  auto xs = new_stream(seed, kSourceSubstream);
  std::vector<double> errors;
  RunningStats bits;
  RunningStats sq;
  int const n = 50000;
  for (int i = 0; i < n; ++i) {
    auto const sub = static_cast<std::uint64_t>(i);
    double const x = source.sample(xs);
    auto const code = lq_encode(source, noise, x, seed, sub);
    BitCursor cursor;
    double const y = lq_decode(source, noise, code, cursor, seed, sub);
    errors.push_back(y - x);
    sq.add((y - x) * (y - x));
    bits.add(static_cast<double>(code.size()));
  }
  auto const ks = ks_test(errors, noise.noise_cdf);
  double const info = 0.5 * std::log2(1.0 + 1.0 / (rho * rho));
  std::printf("error variance %.5f (target %.5f), KS D = %.5f vs %.5f -> %s\n", sq.mean(), rho * rho, ks.statistic,
              ks.threshold, ks.pass ? "Gaussian" : "not Gaussian");
  std::printf("mean payload %.3f +- %.3f bits per sample, I(X;Y) = %.3f bits\n", bits.mean(), bits.std_error(), info);
}
