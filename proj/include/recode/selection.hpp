#pragma once

// Selection samplers and the selection code built on them.
//
// A selection sampler scans an i.i.d. proposal sequence Y_1, Y_2, ... drawn
// from the marginal P_Y and returns an index N <= K, where K is the number of
// proposals it examined, such that Y_N ~ P_{Y|X=x}. The selection code sends
// the Elias delta code of N; the decoder regenerates the proposals from the
// shared stream and emits Y_N.
//
// Per-step draw order is part of the wire contract:
//   rejection: Y_k, then U_k
//   pfr:       Delta_k, then Y_k

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>

#include "recode/bits.hpp"
#include "recode/error.hpp"
#include "recode/models.hpp"
#include "recode/random.hpp"
#include "recode/universal.hpp"

namespace recode {

enum class SelectionAlgorithm : std::uint8_t { rejection, pfr };

inline std::string_view to_string(SelectionAlgorithm algo) noexcept {
  return algo == SelectionAlgorithm::rejection ? "rejection" : "pfr";
}

/// Cap on the number of proposals a sampler may examine.
///
/// On exhaustion the sampler throws BudgetExhausted, unless `return_best` is
/// set, in which case it returns its current best candidate. The result is
/// then only approximately distributed as the target.
struct Budget {
  std::optional<std::uint64_t> max_steps;
  bool return_best = false;

  static Budget unlimited() noexcept { return {}; }
  static Budget steps(std::uint64_t n, bool return_best = false) noexcept { return {n, return_best}; }

  bool exhausted_at(std::uint64_t step) const noexcept { return max_steps && step > *max_steps; }
};

struct SelectionOutcome {
  std::uint64_t selected_index = 0;  // N
  std::uint64_t steps_examined = 0;  // K
  double sample = 0.0;               // Y_N
};

/// Snapshot handed to a rejection observer after each proposal.
struct RejectionStep {
  std::uint64_t index;
  double sample;
  double uniform;
  double ratio;
};

/// Snapshot handed to a PFR observer after each proposal.
struct PfrState {
  std::uint64_t step;
  double arrival;  // T_k
  double tau;      // running minimum of T_j / r(Y_j)
  std::uint64_t best_index;
};

struct NoObserver {
  template <typename T>
  void operator()(T const&) const noexcept {}
};

/// Rejection sampling with the marginal as proposal: accept Y_k when
/// U_k * ||r_x||_inf <= r_x(Y_k). Returns N = K = the first acceptance.
template <ChannelModel M, VariateSource S, typename Observer = NoObserver>
SelectionOutcome rejection_select(M const& mech, double x, S& stream, Budget const& budget = {},
                                  Observer&& observe = {}) {
  double const bound = mech.ratio_sup(x);
  std::uint64_t best_index = 0;
  double best_score = std::numeric_limits<double>::infinity();
  double best_sample = 0.0;

  for (std::uint64_t k = 1;; ++k) {
    if (budget.exhausted_at(k)) {
      if (budget.return_best && best_index > 0) return {best_index, k - 1, best_sample};
      throw BudgetExhausted(k - 1, best_index);
    }
    double const y = mech.marginal_sample(stream);
    double const u = stream.next_uniform();
    double const r = mech.density_ratio(x, y);
    observe(RejectionStep{k, y, u, r});
    if (u * bound <= r) return {k, k, y};
    // Closest miss, kept for the approximate fallback.
    if (r > 0.0 && u / r < best_score) {
      best_score = u / r;
      best_index = k;
      best_sample = y;
    }
  }
}

/// Poisson functional representation (global-bound A* sampling).
///
/// Arrival times T_k = T_{k-1} + Delta_k with Delta_k ~ Exp(1). The sampler
/// keeps tau = min_j T_j / r(Y_j) and stops at the first k with
/// tau <= T_{k+1} / ||r_x||_inf, returning the argmin (first index on ties).
template <ChannelModel M, VariateSource S, typename Observer = NoObserver>
SelectionOutcome pfr_select(M const& mech, double x, S& stream, Budget const& budget = {},
                            Observer&& observe = {}) {
  double const bound = mech.ratio_sup(x);
  double arrival = 0.0;
  double tau = std::numeric_limits<double>::infinity();
  std::uint64_t best_index = 0;
  double best_sample = 0.0;

  for (std::uint64_t k = 1;; ++k) {
    arrival += stream.next_exponential();
    if (tau <= arrival / bound) return {best_index, k - 1, best_sample};
    if (budget.exhausted_at(k)) {
      if (budget.return_best && best_index > 0) return {best_index, k - 1, best_sample};
      throw BudgetExhausted(k - 1, best_index);
    }
    double const y = mech.marginal_sample(stream);
    double const r = mech.density_ratio(x, y);
    if (r > 0.0 && arrival / r < tau) {
      tau = arrival / r;
      best_index = k;
      best_sample = y;
    }
    observe(PfrState{k, arrival, tau, best_index});
  }
}

template <ChannelModel M, VariateSource S>
SelectionOutcome run_selection(SelectionAlgorithm algo, M const& mech, double x, S& stream, Budget const& budget = {}) {
  return algo == SelectionAlgorithm::rejection ? rejection_select(mech, x, stream, budget)
                                               : pfr_select(mech, x, stream, budget);
}

/// Rank of U_k among U_1..U_horizon: |{ i <= horizon : U_i <= U_k }|.
/// Indices are one-based.
inline std::uint64_t sort_index(std::span<double const> uniforms, std::size_t k, std::size_t horizon) {
  if (k < 1 || k > horizon || horizon > uniforms.size()) throw DomainError("sort_index: index out of range");
  double const pivot = uniforms[k - 1];
  std::uint64_t rank = 0;
  for (std::size_t i = 0; i < horizon; ++i)
    if (uniforms[i] <= pivot) ++rank;
  return rank;
}

struct SelectionEncoding {
  BitString bits;
  SelectionOutcome outcome;
};

template <ChannelModel M>
SelectionEncoding selection_encode_detailed(M const& mech, double x, std::uint64_t seed, std::uint64_t substream,
                                            SelectionAlgorithm algo, Budget const& budget = {}) {
  auto stream = new_stream(seed, substream);
  SelectionOutcome const outcome = run_selection(algo, mech, x, stream, budget);
  return {elias_delta_encode(static_cast<std::int64_t>(outcome.selected_index)), outcome};
}

/// Encoder of the selection code: the delta codeword of the selected index.
template <ChannelModel M>
BitString selection_encode(M const& mech, double x, std::uint64_t seed, std::uint64_t substream,
                           SelectionAlgorithm algo, Budget const& budget = {}) {
  return selection_encode_detailed(mech, x, seed, substream, algo, budget).bits;
}

/// Largest index the decoder will replay up to; anything above is treated
/// as a corrupt codeword rather than a multi-hour replay.
inline constexpr std::uint64_t kMaxDecodableIndex = std::uint64_t{1} << 40;

/// Regenerates the n-th proposal of a substream without running the sampler.
template <ChannelModel M>
double selection_proposal(M const& mech, std::uint64_t seed, std::uint64_t substream, SelectionAlgorithm algo,
                          std::uint64_t n) {
  auto stream = new_stream(seed, substream);
  double y = 0.0;
  for (std::uint64_t i = 1; i <= n; ++i) {
    if (algo == SelectionAlgorithm::rejection) {
      y = mech.marginal_sample(stream);
      stream.next_uniform();
    } else {
      stream.next_exponential();
      y = mech.marginal_sample(stream);
    }
  }
  return y;
}

/// Decoder of the selection code. A seed mismatch cannot be detected: it
/// silently yields a sample from the wrong proposal sequence.
template <ChannelModel M>
double selection_decode(M const& mech, BitString const& bits, BitCursor& cursor, std::uint64_t seed,
                        std::uint64_t substream, SelectionAlgorithm algo) {
  std::uint64_t const n = elias_delta_decode(bits, cursor);
  if (n > kMaxDecodableIndex) throw MalformedCodeword("selected index implausibly large");
  return selection_proposal(mech, seed, substream, algo, n);
}

}  // namespace recode
