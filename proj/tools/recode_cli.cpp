// recode: encode, decode, verify and benchmark channel-simulation codes.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or format error,
// 3 codec error.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "recode/acceptance.hpp"
#include "recode/recode.hpp"

namespace {

using namespace recode;

enum Exit : int { kOk = 0, kVerifyFailed = 1, kFormat = 2, kCodec = 3 };

/// Bad flags or flag combinations; reported with exit code 2.
class UsageError : public Error {
public:
  using Error::Error;
};

struct Options {
  std::string mechanism;
  std::string params;
  std::string codec;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> budget;
  bool approximate = false;
  bool force = false;
  std::size_t trials = 10000;
  std::vector<std::string> suites;
  std::string in = "-";
  std::string out = "-";
  bool inject_fault = false;
  double fault_bias = 0.2;
};

double parse_number(std::string_view text, std::string_view what) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto const [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw FormatError("cannot parse " + std::string(what) + " '" + std::string(text) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    auto const pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return parts;
    start = pos + 1;
  }
}

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> out;
  for (auto part : split(text, ',')) out.push_back(parse_number(part, "parameter"));
  return out;
}

/// --params grammar per mechanism:
///   categorical        "source_pmf;row_1;...;row_n", comma-separated entries
///   gaussian-gaussian  "sigma,rho"
///   uniform-additive   "L"
///   gaussian-uniform   "sigma"
Mechanism make_mechanism(std::string const& name, std::string const& params) {
  auto const id = parse_mechanism_id(name);
  if (!id) throw UsageError("unknown mechanism '" + name + "'");
  try {
    switch (*id) {
      case MechanismId::categorical: {
        std::string const p = params.empty() ? "0.5,0.5;0.8,0.2;0.2,0.8" : params;
        auto const groups = split(p, ';');
        if (groups.size() < 2) throw UsageError("categorical needs a source pmf and at least one channel row");
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 1; i < groups.size(); ++i) rows.push_back(parse_list(groups[i]));
        return CategoricalMechanism(parse_list(groups[0]), std::move(rows));
      }
      case MechanismId::gaussian_gaussian: {
        auto const v = parse_list(params.empty() ? "1,0.5" : params);
        if (v.size() != 2) throw UsageError("gaussian-gaussian takes sigma,rho");
        return GaussianGaussianMechanism(v[0], v[1]);
      }
      case MechanismId::uniform_additive: {
        auto const v = parse_list(params.empty() ? "16" : params);
        if (v.size() != 1 || v[0] != std::floor(v[0]) || v[0] < 1 || v[0] > 0x1.0p52)
          throw UsageError("uniform-additive takes a positive integer level count");
        return UniformAdditiveMechanism(static_cast<std::int64_t>(v[0]));
      }
      case MechanismId::gaussian_uniform: {
        auto const v = parse_list(params.empty() ? "1" : params);
        if (v.size() != 1 || !(v[0] > 0.0)) throw UsageError("gaussian-uniform takes a positive sigma");
        return GaussianUniformParams{v[0]};
      }
    }
  } catch (DomainError const& e) {
    throw UsageError(std::string("invalid --params: ") + e.what());
  } catch (FormatError const& e) {
    throw UsageError(std::string("invalid --params: ") + e.what());
  }
  throw UsageError("unknown mechanism");
}

Codec make_codec(std::string const& name, Mechanism const& mech) {
  auto const codec = parse_codec(name);
  if (!codec) throw UsageError("unknown codec '" + name + "'");
  if (!compatible(mechanism_id(mech), *codec))
    throw UsageError(name + " cannot realise the " + std::string(mechanism_name(mechanism_id(mech))) + " mechanism");
  return *codec;
}

Budget make_budget(Options const& o, Mechanism const& mech, Codec codec) {
  // The Gaussian density ratio is unbounded in x, so E[K] is infinite for
  // selection codecs: an unlimited run can take arbitrarily long.
  if (std::holds_alternative<GaussianGaussianMechanism>(mech) && is_selection(codec) && !o.budget && !o.force)
    throw UsageError("gaussian-gaussian with a selection codec needs --budget (or --force to run unbounded)");
  if (o.approximate && !o.budget) throw UsageError("--approximate needs --budget");
  if (!o.budget) return Budget::unlimited();
  return Budget::steps(*o.budget, o.approximate);
}

std::string read_all(std::string const& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), {}};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_all(std::string const& path, std::string_view data) {
  if (path == "-") {
    std::cout.write(data.data(), static_cast<std::streamsize>(data.size()));
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

/// Newline-separated decimals; blank lines are skipped.
std::vector<double> parse_records(std::string const& text) {
  std::vector<double> out;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      double const v = parse_number(line, "record");
      if (!std::isfinite(v)) throw FormatError("non-finite record");
      out.push_back(v);
    } catch (FormatError const& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

int cmd_encode(Options const& o) {
  if (o.mechanism.empty() || o.codec.empty()) throw UsageError("encode needs --mechanism and --codec");
  Mechanism const mech = make_mechanism(o.mechanism, o.params);
  Codec const codec = make_codec(o.codec, mech);
  RecordCodec const rc(mech, codec, make_budget(o, mech, codec));
  auto const records = parse_records(read_all(o.in));
  auto const bytes = serialize(encode_records(rc, records, o.seed));
  write_all(o.out, std::string_view(reinterpret_cast<char const*>(bytes.data()), bytes.size()));
  return kOk;
}

int cmd_decode(Options const& o) {
  std::string const raw = read_all(o.in);
  auto const container =
      deserialize(std::span(reinterpret_cast<std::uint8_t const*>(raw.data()), raw.size()));
  std::string text;
  for (double y : decode_records(container)) {
    text += format_number(y);
    text += '\n';
  }
  write_all(o.out, text);
  return kOk;
}

int cmd_verify(Options const& o) {
  for (auto const& s : o.suites)
    if (!known_suite(s)) throw UsageError("unknown suite '" + s + "'");
  if (o.inject_fault) testing::uniform_bias = o.fault_bias;

  AcceptanceOptions options;
  if (o.seed != 0) options.seed = o.seed;
  options.suites = o.suites;
  auto const results = run_acceptance(options);

  std::ostringstream csv;
  write_csv_header(csv);
  int failures = 0;
  for (auto const& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << "  [" << r.id << "] " << r.suite << ": " << r.title << "\n      "
              << r.detail << '\n';
    if (!r.pass) ++failures;
    write_csv(csv, r.rows);
    csv << r.suite << "/pass," << (r.pass ? 1 : 0) << ",0,1\n";
  }
  std::cout << results.size() - static_cast<std::size_t>(failures) << "/" << results.size() << " criteria passed\n";
  if (o.out != "-") write_all(o.out, csv.str());
  return failures == 0 ? kOk : kVerifyFailed;
}

struct BenchCell {
  std::string mechanism;
  std::string params;
  std::string codec;
  std::optional<std::uint64_t> budget;
};

std::vector<BenchCell> default_sweep() {
  std::vector<BenchCell> cells;
  for (char const* levels : {"4", "16", "64"})
    for (char const* codec : {"dq", "pfr"}) cells.push_back({"uniform-additive", levels, codec, std::nullopt});
  cells.push_back({"categorical", "1;0.3,0.7", "pfr", std::nullopt});
  for (char const* codec : {"rejection", "pfr"})
    cells.push_back({"categorical", "0.5,0.5;0.8,0.2;0.2,0.8", codec, std::nullopt});
  cells.push_back({"gaussian-gaussian", "1,0.5", "lq", std::nullopt});
  cells.push_back({"gaussian-gaussian", "1,0.5", "pfr", 100000});
  cells.push_back({"gaussian-uniform", "1", "dq", std::nullopt});
  return cells;
}

int cmd_bench(Options const& o) {
  std::vector<BenchCell> cells;
  if (!o.mechanism.empty()) {
    if (o.codec.empty()) throw UsageError("bench with --mechanism also needs --codec");
    cells.push_back({o.mechanism, o.params, o.codec, o.budget});
  } else {
    cells = default_sweep();
  }

  std::vector<CsvRow> rows;
  int errors = 0;
  for (auto const& cell : cells) {
    Mechanism const mech = make_mechanism(cell.mechanism, cell.params);
    Codec const codec = make_codec(cell.codec, mech);
    Options cell_options = o;
    cell_options.budget = cell.budget;
    // Over-budget records fall back to the best candidate so one heavy-tailed
    // input cannot sink the whole cell.
    if (cell.budget) cell_options.approximate = true;
    try {
      RecordCodec const rc(mech, codec, make_budget(cell_options, mech, codec));
      auto const report = rate_experiment(rc, o.trials, o.seed);
      auto const cell_rows = csv_rows(report);
      rows.insert(rows.end(), cell_rows.begin(), cell_rows.end());
    } catch (UsageError const&) {
      throw;
    } catch (Error const& e) {
      ++errors;
      rows.push_back({describe(mech) + "/" + cell.codec + "/error", std::nan(""), 0.0, 0});
      std::cerr << "bench: " << describe(mech) << " " << cell.codec << ": " << e.what() << '\n';
    }
  }

  std::ostringstream csv;
  write_csv_header(csv);
  write_csv(csv, rows);
  write_all(o.out, csv.str());
  write_table(o.out == "-" ? std::cerr : std::cout, rows);
  return errors == 0 ? kOk : kCodec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Channel-simulation codes: selection samplers and dithered quantisers"};
  app.require_subcommand(1);
  Options o;

  auto add_model_flags = [&](CLI::App* cmd) {
    cmd->add_option("--mechanism", o.mechanism,
                    "categorical | gaussian-gaussian | uniform-additive | gaussian-uniform");
    cmd->add_option("--params", o.params, "mechanism parameters, e.g. \"0.5,0.5;0.8,0.2;0.2,0.8\" or \"1,0.5\"");
    cmd->add_option("--codec", o.codec, "rejection | pfr | dq | lq");
    cmd->add_option("--budget", o.budget, "maximum proposals per record for selection codecs");
    cmd->add_flag("--approximate", o.approximate, "on budget exhaustion return the best candidate");
    cmd->add_flag("--force", o.force, "allow an unbounded selection run on the gaussian-gaussian mechanism");
  };

  auto* encode = app.add_subcommand("encode", "encode newline-separated records into a container");
  add_model_flags(encode);
  encode->add_option("--seed", o.seed, "shared-randomness seed stored in the header");
  encode->add_option("--in", o.in, "record file, '-' for stdin");
  encode->add_option("--out", o.out, "container file, '-' for stdout");

  auto* decode = app.add_subcommand("decode", "decode a container into reconstructions");
  decode->add_option("--in", o.in, "container file, '-' for stdin");
  decode->add_option("--out", o.out, "reconstruction file, '-' for stdout");

  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  verify->add_option("--suite", o.suites, "suite names to run (repeat or comma-separate)")->delimiter(',');
  verify->add_option("--seed", o.seed, "override the suite seed");
  verify->add_option("--out", o.out, "CSV report path");
  verify->add_flag("--inject-fault", o.inject_fault, "bias every uniform draw, to check the suite catches it");
  verify->add_option("--fault-bias", o.fault_bias, "exponent bias used by --inject-fault");

  auto* bench = app.add_subcommand("bench", "measure rates and runtimes as CSV");
  add_model_flags(bench);
  bench->add_option("--seed", o.seed, "seed");
  bench->add_option("--trials", o.trials, "records per cell")->check(CLI::Range(2, 100000000));
  bench->add_option("--out", o.out, "CSV path, '-' for stdout");

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    int const rc = app.exit(e);
    return rc == 0 ? kOk : kFormat;
  }

  try {
    if (*encode) return cmd_encode(o);
    if (*decode) return cmd_decode(o);
    if (*verify) return cmd_verify(o);
    return cmd_bench(o);
  } catch (UsageError const& e) {
    std::cerr << "recode: " << e.what() << '\n';
    return kFormat;
  } catch (FormatError const& e) {
    std::cerr << "recode: format error: " << e.what() << '\n';
    return kFormat;
  } catch (Error const& e) {
    std::cerr << "recode: codec error: " << e.what() << '\n';
    return kCodec;
  }
}
