// Simulates a binary symmetric channel with flip probability 0.2 through the
// pfr selection code: the receiver sees only the Elias delta codeword of an
// index and still outputs Y ~ P_{Y|X=x}.

#include <cstdio>
#include <vector>

#include "recode/recode.hpp"

int main() {
  using namespace recode;
  auto const channel = CategoricalMechanism::binary_symmetric(0.2);
  std::uint64_t const seed = 2025;

  std::printf("record  x  index  codeword  y\n");
  auto source = new_stream(seed, kSourceSubstream);
  for (std::uint64_t i = 0; i < 8; ++i) {
    double const x = channel.source_sample(source);
    auto const enc = selection_encode_detailed(channel, x, seed, i, SelectionAlgorithm::pfr);
    BitCursor cursor;
    double const y = selection_decode(channel, enc.bits, cursor, seed, i, SelectionAlgorithm::pfr);
    std::printf("%6llu  %.0f  %5llu  %-8s  %.0f\n", static_cast<unsigned long long>(i), x,
                static_cast<unsigned long long>(enc.outcome.selected_index), enc.bits.to_string().c_str(), y);
  }

  // Empirical law of Y given X = 0 and the average cost.
  std::uint64_t flips = 0;
  RunningStats bits;
  int const n = 100000;
  for (int i = 0; i < n; ++i) {
    auto const code = selection_encode(channel, 0.0, seed + 1, static_cast<std::uint64_t>(i), SelectionAlgorithm::pfr);
    BitCursor cursor;
    if (selection_decode(channel, code, cursor, seed + 1, static_cast<std::uint64_t>(i), SelectionAlgorithm::pfr) != 0.0)
      ++flips;
    bits.add(static_cast<double>(code.size()));
  }
  std::printf("\nP[Y != 0 | X = 0] = %.4f (target 0.2)\n", static_cast<double>(flips) / n);
  std::printf("mean codeword length %.3f bits, I(X;Y) = %.3f bits, lb ||r_0|| = %.3f bits\n", bits.mean(),
              *channel.mutual_information(), std::log2(channel.ratio_sup(0.0)));
}
