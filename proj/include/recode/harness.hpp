#pragma once

// Experiments that check the codes against their claimed laws, plus CSV
// reporting.
//
// Every experiment is a pure function of its arguments: trial i always uses
// substream i (or a documented offset of it) of the given seed, and results
// are aggregated in trial order, so reruns reproduce every statistic to the
// last bit regardless of how many threads did the work.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "recode/codec.hpp"
#include "recode/dither.hpp"
#include "recode/models.hpp"
#include "recode/selection.hpp"
#include "recode/smsu.hpp"
#include "recode/stats.hpp"

namespace recode {

/// Substream reserved for drawing source inputs; record substreams count up
/// from zero and never reach it.
inline constexpr std::uint64_t kSourceSubstream = ~std::uint64_t{0};

namespace detail {

/// Evaluates f(0..n-1) on a few threads and returns the results in index
/// order. If any call throws, the exception of the lowest index is rethrown.
template <typename F>
auto parallel_map(std::size_t n, F const& f) -> std::vector<decltype(f(std::size_t{}))> {
  using T = decltype(f(std::size_t{}));
  std::vector<std::optional<T>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::size_t const workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(1, n / 256));
  auto run = [&](std::size_t w) {
    for (std::size_t i = w; i < n; i += workers) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        errors[i] = std::current_exception();
        return;
      }
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }
  for (auto const& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

inline MeanEstimate estimate(RunningStats const& s) { return {s.mean(), s.std_error(), s.count()}; }

inline std::vector<double> source_draws(Mechanism const& mech, std::size_t n, std::uint64_t seed) {
  auto stream = new_stream(seed, kSourceSubstream);
  std::vector<double> xs(n);
  for (auto& x : xs) x = sample_source(mech, stream);
  return xs;
}

inline std::optional<double> log_ratio_sup(Mechanism const& mech, double x) {
  if (std::holds_alternative<GaussianUniformParams>(mech)) return std::nullopt;
  return with_channel_model(mech, [&](auto const& m) { return std::log2(m.ratio_sup(x)); });
}

}  // namespace detail

/// Upper-bound shape of a selection code: E + 2 lb(E + 1) for E = E[lb ||r_X||].
inline double selection_rate_shape(double e_log_sup) { return e_log_sup + 2.0 * std::log2(e_log_sup + 1.0); }

/// Upper-bound shape of a quantiser code: I + lb(I + 1).
inline double quantiser_rate_shape(double information) { return information + std::log2(information + 1.0); }

/// Payload rate of one codec on one mechanism, with its comparison baselines.
struct RateReport {
  std::string mechanism;
  std::string codec;
  std::size_t n_trials = 0;
  MeanEstimate payload_bits;
  std::optional<MeanEstimate> steps;           // selection codecs only
  std::optional<double> mutual_information;    // I(X;Y) when known in closed form
  std::optional<MeanEstimate> log_ratio_sup;   // E[lb ||r_X||], selection codecs only
  std::optional<double> bound_shape;           // selection or quantiser shape above
  std::optional<double> residual;              // payload mean minus bound_shape
  double seconds_per_record = 0.0;
};

/// Encodes n i.i.d. source draws, record i on substream i. Seed bits are
/// header overhead and not counted.
inline RateReport rate_experiment(RecordCodec const& codec, std::size_t n_records, std::uint64_t seed) {
  if (n_records < 2) throw InsufficientSamples("rate experiment needs at least two records");
  Mechanism const& mech = codec.mechanism();
  auto const xs = detail::source_draws(mech, n_records, seed);

  struct Row {
    std::size_t bits;
    std::uint64_t steps;
    std::optional<double> log_sup;
  };
  auto const start = std::chrono::steady_clock::now();
  auto const rows = detail::parallel_map(n_records, [&](std::size_t i) {
    auto const [bits, steps] = codec.encode(xs[i], seed, i);
    std::optional<double> log_sup;
    if (is_selection(codec.codec())) log_sup = detail::log_ratio_sup(mech, xs[i]);
    return Row{bits.size(), steps, log_sup};
  });
  auto const elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  RunningStats payload;
  RunningStats steps;
  RunningStats log_sup;
  for (auto const& r : rows) {
    payload.add(static_cast<double>(r.bits));
    steps.add(static_cast<double>(r.steps));
    if (r.log_sup) log_sup.add(*r.log_sup);
  }

  RateReport rep;
  rep.mechanism = describe(mech);
  rep.codec = std::string(to_string(codec.codec()));
  rep.n_trials = n_records;
  rep.payload_bits = detail::estimate(payload);
  rep.seconds_per_record = elapsed / static_cast<double>(n_records);
  rep.mutual_information = std::visit(
      [](auto const& m) -> std::optional<double> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GaussianUniformParams>) {
          return std::nullopt;
        } else {
          return m.mutual_information();
        }
      },
      mech);
  if (is_selection(codec.codec())) {
    rep.steps = detail::estimate(steps);
    rep.log_ratio_sup = detail::estimate(log_sup);
    rep.bound_shape = selection_rate_shape(log_sup.mean());
  } else if (rep.mutual_information) {
    rep.bound_shape = quantiser_rate_shape(*rep.mutual_information);
  }
  if (rep.bound_shape) rep.residual = rep.payload_bits.mean - *rep.bound_shape;
  return rep;
}

/// Runs decode(encode(x)) for a fixed input on substreams 0..n-1 and tests
/// the outputs against P_{Y|X=x}: chi-square for the categorical channel,
/// KS otherwise.
inline GofResult correctness_experiment(RecordCodec const& codec, double x, std::size_t n_trials,
                                        std::uint64_t seed) {
  if (n_trials < 10000) throw InsufficientSamples("correctness experiment needs at least 10^4 trials");
  auto const ys = detail::parallel_map(n_trials, [&](std::size_t i) {
    auto const bits = codec.encode(x, seed, i).first;
    BitCursor cursor;
    double const y = codec.decode(bits, cursor, seed, i);
    if (!cursor.at_end(bits)) throw MalformedCodeword("decoder did not consume the whole codeword");
    return y;
  });

  Mechanism const& mech = codec.mechanism();
  if (auto const* cat = std::get_if<CategoricalMechanism>(&mech)) {
    auto const& pmf = cat->conditional_pmf(x);
    std::vector<std::uint64_t> counts(pmf.size(), 0);
    for (double y : ys) ++counts[static_cast<std::size_t>(y)];
    return chi_square_test(counts, pmf);
  }
  if (is_selection(codec.codec()))
    return with_channel_model(mech, [&](auto const& m) {
      return ks_test(ys, [&](double y) { return m.conditional_cdf(x, y); });
    });
  auto const additive = additive_view(mech);
  return ks_test(ys, [&](double y) { return additive.conditional_cdf(x, y); });
}

/// Reconstruction error of a quantiser code over i.i.d. source draws.
struct NoiseReport {
  GofResult gof;                     // y - x against the noise CDF
  std::size_t bracket_violations = 0;  // (y - x) / s - b(s) outside (-1/2, 1/2]
  std::size_t replay_mismatches = 0;   // decoder output differs from encoder's reconstruction
};

inline NoiseReport noise_experiment(AdditiveUnimodalMechanism const& mech, Codec codec, std::size_t n_records,
                                    std::uint64_t seed) {
  if (is_selection(codec)) throw DomainError("noise experiment applies to quantiser codecs");
  auto stream = new_stream(seed, kSourceSubstream);
  std::vector<double> xs(n_records);
  for (auto& x : xs) x = mech.source.sample(stream);

  struct Row {
    double error;
    bool in_bracket;
    bool replayed;
  };
  auto const rows = detail::parallel_map(n_records, [&](std::size_t i) {
    auto const enc = codec == Codec::dq ? dq_encode_detailed(mech.source, xs[i], seed, i)
                                        : lq_encode_detailed(mech.source, mech.noise, xs[i], seed, i);
    BitCursor cursor;
    double const y = codec == Codec::dq ? dq_decode(mech.source, enc.bits, cursor, seed, i)
                                        : lq_decode(mech.source, mech.noise, enc.bits, cursor, seed, i);
    double const normalised = (y - xs[i]) / enc.record.scale - enc.record.offset;
    // dq is checked exactly; the layered bracket carries one division's rounding.
    double const slack = codec == Codec::dq ? 0.0 : 1e-9;
    return Row{y - xs[i], normalised > -0.5 - slack && normalised <= 0.5 + slack,
               y == enc.record.reconstruction() && cursor.at_end(enc.bits)};
  });

  NoiseReport rep;
  std::vector<double> errors;
  errors.reserve(n_records);
  for (auto const& r : rows) {
    errors.push_back(r.error);
    if (!r.in_bracket) ++rep.bracket_violations;
    if (!r.replayed) ++rep.replay_mismatches;
  }
  rep.gof = ks_test(std::move(errors), mech.noise.noise_cdf);
  return rep;
}

/// Runtime K of both selection samplers at one input.
struct RuntimeReport {
  MeanEstimate rejection_steps;
  MeanEstimate pfr_steps;
  GofResult equal_in_distribution;  // two-sample KS of the two K samples
};

/// Rejection runs use substreams 0..n-1 and PFR runs n..2n-1, so the two
/// samples are independent.
template <ChannelModel M>
RuntimeReport runtime_experiment(M const& mech, double x, std::size_t n_trials, std::uint64_t seed,
                                 Budget const& budget = {}) {
  auto const ks = detail::parallel_map(2 * n_trials, [&](std::size_t i) {
    auto stream = new_stream(seed, i);
    auto const algo = i < n_trials ? SelectionAlgorithm::rejection : SelectionAlgorithm::pfr;
    return static_cast<double>(run_selection(algo, mech, x, stream, budget).steps_examined);
  });
  std::vector<double> const rej(ks.begin(), ks.begin() + static_cast<std::ptrdiff_t>(n_trials));
  std::vector<double> const pfr(ks.begin() + static_cast<std::ptrdiff_t>(n_trials), ks.end());
  RunningStats a;
  RunningStats b;
  for (double v : rej) a.add(v);
  for (double v : pfr) b.add(v);
  return {detail::estimate(a), detail::estimate(b), ks_two_sample(rej, pfr)};
}

/// Normalised Poisson arrivals T_i / T_{k+1}, coordinate by coordinate
/// against the Beta(i, k + 1 - i) law of the i-th of k sorted uniforms.
struct Theorem1Report {
  std::vector<GofResult> coordinates;
  bool ascending = true;
};

inline Theorem1Report theorem1_experiment(unsigned k, std::size_t n_trials, std::uint64_t seed) {
  if (k < 1 || k > 5) throw DomainError("theorem1 experiment supports k in [1, 5]");
  auto const draws = detail::parallel_map(n_trials, [&](std::size_t t) {
    auto stream = new_stream(seed, t);
    std::vector<double> arrivals(k + 1);
    double acc = 0.0;
    for (auto& a : arrivals) a = acc += stream.next_exponential();
    std::vector<double> coords(k);
    for (unsigned i = 0; i < k; ++i) coords[i] = arrivals[i] / arrivals[k];
    return coords;
  });

  Theorem1Report rep;
  std::vector<std::vector<double>> columns(k, std::vector<double>(n_trials));
  for (std::size_t t = 0; t < n_trials; ++t) {
    for (unsigned i = 0; i < k; ++i) columns[i][t] = draws[t][i];
    for (unsigned i = 1; i < k; ++i)
      if (!(draws[t][i - 1] < draws[t][i])) rep.ascending = false;
  }
  for (unsigned i = 0; i < k; ++i) {
    unsigned const a = i + 1;
    unsigned const b = k - i;
    rep.coordinates.push_back(ks_test(columns[i], [a, b](double v) { return beta_cdf_integer(v, a, b); }));
  }
  return rep;
}

/// KS of simulated S * (U + b(S)) against the representation's noise CDF.
/// Draw order per trial: the scale, then one uniform.
inline GofResult smsu_experiment(SmsuRepresentation const& smsu, std::size_t n_trials, std::uint64_t seed) {
  if (n_trials < 10000) throw InsufficientSamples("smsu experiment needs at least 10^4 trials");
  auto const eps = detail::parallel_map(n_trials, [&](std::size_t t) {
    auto stream = new_stream(seed, t);
    double const s = smsu.scale_sampler(stream);
    double const u = stream.next_uniform() - 0.5;
    return s * (u + smsu.offset(s));
  });
  return ks_test(eps, smsu.noise_cdf);
}

/// Index histograms of PFR's N and of the rank of the accepted uniform in a
/// rejection run, sort(K | K). Indices above `cells` share the last bin.
struct SortIndexReport {
  std::vector<std::uint64_t> pfr_counts;
  std::vector<std::uint64_t> sorted_counts;
  GofResult homogeneity;
};

template <ChannelModel M>
SortIndexReport sort_index_experiment(M const& mech, double x, std::size_t n_trials, std::uint64_t seed,
                                      std::size_t cells = 64) {
  auto const pairs = detail::parallel_map(n_trials, [&](std::size_t t) {
    auto s1 = new_stream(seed, t);
    std::uint64_t const n = pfr_select(mech, x, s1).selected_index;
    std::vector<double> uniforms;
    auto s2 = new_stream(seed, n_trials + t);
    auto const rej =
        rejection_select(mech, x, s2, Budget{}, [&](RejectionStep const& st) { uniforms.push_back(st.uniform); });
    return std::pair{n, sort_index(uniforms, rej.steps_examined, rej.steps_examined)};
  });
  SortIndexReport rep;
  rep.pfr_counts.assign(cells, 0);
  rep.sorted_counts.assign(cells, 0);
  for (auto const& [n, rank] : pairs) {
    ++rep.pfr_counts[std::min<std::uint64_t>(n, cells) - 1];
    ++rep.sorted_counts[std::min<std::uint64_t>(rank, cells) - 1];
  }
  rep.homogeneity = chi_square_homogeneity(rep.pfr_counts, rep.sorted_counts);
  return rep;
}

/// One CSV line: name,value,stderr,n.
struct CsvRow {
  std::string name;
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// Shortest decimal that reads back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto const res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::vector<CsvRow> csv_rows(RateReport const& r) {
  std::string const prefix = r.mechanism + "/" + r.codec + "/";
  std::vector<CsvRow> rows;
  rows.push_back({prefix + "payload_bits", r.payload_bits.mean, r.payload_bits.std_error, r.n_trials});
  if (r.steps) rows.push_back({prefix + "steps", r.steps->mean, r.steps->std_error, r.n_trials});
  if (r.mutual_information) rows.push_back({prefix + "mutual_information", *r.mutual_information, 0.0, r.n_trials});
  if (r.log_ratio_sup)
    rows.push_back({prefix + "log_ratio_sup", r.log_ratio_sup->mean, r.log_ratio_sup->std_error, r.n_trials});
  if (r.bound_shape) rows.push_back({prefix + "bound_shape", *r.bound_shape, 0.0, r.n_trials});
  if (r.residual) rows.push_back({prefix + "residual", *r.residual, r.payload_bits.std_error, r.n_trials});
  rows.push_back({prefix + "seconds_per_record", r.seconds_per_record, 0.0, r.n_trials});
  return rows;
}

inline std::vector<CsvRow> csv_rows(std::string const& name, GofResult const& g) {
  return {{name + "/" + std::string(to_string(g.kind)) + "_statistic", g.statistic, 0.0, g.n},
          {name + "/" + std::string(to_string(g.kind)) + "_threshold", g.threshold, 0.0, g.n},
          {name + "/pass", g.pass ? 1.0 : 0.0, 0.0, g.n}};
}

inline void write_csv_header(std::ostream& out) { out << "name,value,stderr,n\n"; }

inline void write_csv(std::ostream& out, std::vector<CsvRow> const& rows) {
  for (auto const& r : rows)
    out << r.name << ',' << format_number(r.value) << ',' << format_number(r.std_error) << ',' << r.n << '\n';
}

/// Fixed-width plain-text rendering of the same rows.
inline void write_table(std::ostream& out, std::vector<CsvRow> const& rows) {
  std::size_t width = 4;
  for (auto const& r : rows) width = std::max(width, r.name.size());
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(s.size(), w), ' ');
    return s;
  };
  out << pad("name", width) << "  " << pad("value", 24) << "  " << pad("stderr", 24) << "  n\n";
  for (auto const& r : rows)
    out << pad(r.name, width) << "  " << pad(format_number(r.value), 24) << "  "
        << pad(format_number(r.std_error), 24) << "  " << r.n << '\n';
}

}  // namespace recode
