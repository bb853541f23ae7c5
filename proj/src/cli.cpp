// SPDX-License-Identifier: Apache-2.0
#include "entconc/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "entconc/bounds.hpp"
#include "entconc/coding.hpp"
#include "entconc/mgf.hpp"
#include "entconc/montecarlo.hpp"
#include "entconc/rng.hpp"
#include "entconc/simplex.hpp"

namespace entconc {

namespace {

constexpr std::string_view kCommandNames[] = {"bounds",         "mc-tail",      "mgf-verify",
                                              "oracle",         "counterexample", "misspecified",
                                              "coding",         "exponent"};

const std::vector<std::string> kGlobalKeys = {"command", "seed", "workers", "out", "format", "curves"};
const std::vector<std::string> kListKeys = {"eps", "lambda", "n", "K", "p"};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) items.push_back(std::move(t));
  }
  return items;
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("'" + key + "' expects a number, got '" + text + "'");
  }
  return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("'" + key + "' expects a nonnegative integer, got '" + text + "'");
  }
  return v;
}

// Typed access to command parameters. Every default that gets used is
// written back so the output header echoes the fully resolved configuration.
class Params {
 public:
  explicit Params(const std::map<std::string, std::string>& given) : values_(given) {}

  bool has(const std::string& key) const { return values_.contains(key); }

  std::string text(const std::string& key, const std::string& fallback) {
    return values_.try_emplace(key, fallback).first->second;
  }

  std::size_t size(const std::string& key, std::optional<std::size_t> fallback = std::nullopt) {
    if (!has(key)) {
      if (!fallback) throw ConfigError("missing required key '" + key + "'");
      values_[key] = std::to_string(*fallback);
    }
    return static_cast<std::size_t>(parse_unsigned(key, values_.at(key)));
  }

  double real(const std::string& key, std::optional<double> fallback = std::nullopt) {
    if (!has(key)) {
      if (!fallback) throw ConfigError("missing required key '" + key + "'");
      values_[key] = format_number(*fallback);
    }
    return parse_double(key, values_.at(key));
  }

  std::vector<double> reals(const std::string& key,
                            std::optional<std::vector<double>> fallback = std::nullopt) {
    if (!has(key)) {
      if (!fallback) throw ConfigError("missing required key '" + key + "'");
      std::string joined;
      for (double v : *fallback) joined += (joined.empty() ? "" : ",") + format_number(v);
      values_[key] = joined;
    }
    std::vector<double> out;
    for (const auto& item : split_list(values_.at(key))) out.push_back(parse_double(key, item));
    if (out.empty()) throw ConfigError("'" + key + "' needs at least one value");
    return out;
  }

  std::vector<std::size_t> sizes(const std::string& key,
                                 std::optional<std::vector<std::size_t>> fallback = std::nullopt) {
    if (!has(key)) {
      if (!fallback) throw ConfigError("missing required key '" + key + "'");
      std::string joined;
      for (auto v : *fallback) joined += (joined.empty() ? "" : ",") + std::to_string(v);
      values_[key] = joined;
    }
    std::vector<std::size_t> out;
    for (const auto& item : split_list(values_.at(key))) {
      out.push_back(static_cast<std::size_t>(parse_unsigned(key, item)));
    }
    if (out.empty()) throw ConfigError("'" + key + "' needs at least one value");
    return out;
  }

  const std::map<std::string, std::string>& resolved() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

std::vector<double> positive_epsilons(Params& params) {
  auto eps = params.reals("eps");
  for (double e : eps) {
    if (!(e > 0.0) || !std::isfinite(e)) throw ConfigError("every eps must be positive");
  }
  return eps;
}

std::string metric_name(const BoundReport& b) {
  std::string name(to_string(b.family));
  if (b.family == BoundFamily::bits) name += "-" + std::string(to_string(b.side));
  return name;
}

Row bound_row(std::string_view command, std::size_t K, std::size_t n, double eps,
              const BoundReport& b) {
  Row r;
  r.command = command;
  r.K = K;
  r.n = n;
  r.epsilon = eps;
  r.metric = metric_name(b);
  if (b.applicable) r.value = b.value;
  r.valid = b.applicable && b.valid;
  r.regime = b.applicable ? std::string(to_string(b.regime)) : "not-applicable";
  return r;
}

Row value_row(std::string_view command, std::optional<std::size_t> K, std::optional<std::size_t> n,
              std::optional<double> eps, std::string metric, double value,
              std::optional<bool> valid = std::nullopt, std::string regime = {}) {
  Row r;
  r.command = command;
  r.K = K;
  r.n = n;
  r.epsilon = eps;
  r.metric = std::move(metric);
  r.value = value;
  r.valid = valid;
  r.regime = std::move(regime);
  return r;
}

void add_frequency_rows(std::vector<Row>& rows, std::string_view command, std::size_t K,
                        std::size_t n, const TailEstimate& est) {
  for (Side side : {Side::left, Side::right, Side::two_sided}) {
    const double f = est.frequency(side);
    const double h = est.ci_halfwidth(side);
    Row r = value_row(command, K, n, est.epsilon, "freq-" + std::string(to_string(side)), f);
    r.ci_lo = std::max(0.0, f - h);
    r.ci_hi = std::min(1.0, f + h);
    rows.push_back(std::move(r));
  }
}

void check_dominance(RunOutcome& out, std::string_view what, const TailEstimate& est) {
  for (const auto& b : dominance_violations(est)) {
    out.failures.push_back(std::string(what) + ": frequency " +
                           format_number(est.frequency(b.side)) + " exceeds " + metric_name(b) +
                           " = " + format_number(b.value) + " at eps " +
                           format_number(est.epsilon));
  }
}

LogBase parse_base(const std::string& s) {
  if (s == "nat" || s == "nats") return LogBase::natural;
  if (s == "bit" || s == "bits") return LogBase::bits;
  throw ConfigError("base must be 'nat' or 'bit', got '" + s + "'");
}

ParamGenerator generator(Params& params, const std::string& fallback) {
  try {
    return parse_generator(params.text("gen", fallback));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

ProbVector source_distribution(Params& params) {
  if (params.has("p")) {
    const auto p = params.reals("p");
    try {
      return ProbVector(p);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("p: ") + e.what());
    }
  }
  return ProbVector::uniform(params.size("K"));
}

std::string lambda_tag(double lambda) { return "lambda=" + format_number(lambda); }

void run_bounds(const RunConfig& cfg, Params& params, RunOutcome& out) {
  const std::size_t K = params.size("K");
  const std::size_t n = params.size("n");
  const auto eps = positive_epsilons(params);
  const LogBase base = parse_base(params.text("base", "nat"));
  std::optional<ParamSet> members;
  const std::string gen = params.text("gen", "none");
  if (gen != "none") members = generate_params(generator(params, gen), K, n, cfg.seed);
  for (double e : eps) {
    const TailQuery q{n, K, e, Side::two_sided, base};
    for (const auto& b : compare_bounds(q, members ? &*members : nullptr)) {
      out.rows.push_back(bound_row("bounds", K, n, e, b));
    }
  }
}

void run_mc_tail(const RunConfig& cfg, Params& params, RunOutcome& out) {
  const std::size_t K = params.size("K");
  const std::size_t n = params.size("n");
  const auto eps = positive_epsilons(params);
  const auto gen = generator(params, "uniform");
  const std::size_t reps = params.size("reps", 100000);
  ExperimentConfig exp{generate_params(gen, K, n, cfg.seed), {reps, eps, cfg.seed, cfg.workers}};
  for (const auto& est : estimate_tail(exp)) {
    add_frequency_rows(out.rows, "mc-tail", K, n, est);
    for (const auto& b : est.bound_rows) out.rows.push_back(bound_row("mc-tail", K, n, est.epsilon, b));
    check_dominance(out, "mc-tail", est);
    if (gen != ParamGenerator::counterexample) continue;
    const auto exact = counterexample_exact_tail(K, n, est.epsilon);
    const std::pair<Side, double> sides[] = {
        {Side::left, exact.exact_left}, {Side::right, exact.exact_right}, {Side::two_sided, exact.exact_tail}};
    for (auto [side, value] : sides) {
      const bool match = std::abs(est.frequency(side) - value) <= est.ci_halfwidth(side);
      out.rows.push_back(value_row("mc-tail", K, n, est.epsilon,
                                   "exact-" + std::string(to_string(side)), value, match));
      if (!match) {
        out.failures.push_back("mc-tail: " + std::string(to_string(side)) + " frequency " +
                               format_number(est.frequency(side)) + " differs from the exact tail " +
                               format_number(value) + " by more than 3 sigma");
      }
    }
  }
}

void run_mgf_verify(const RunConfig& cfg, Params& params, RunOutcome& out) {
  const std::size_t K = params.size("K", 5);
  const std::size_t reps = params.size("reps", 1000);
  const auto gen = generator(params, "random");
  const double lower = lambda_domain(K).lower;
  std::vector<double> grid;
  for (int i = 0; i < 50; ++i) grid.push_back(0.99 * lower + (2.0 - 0.99 * lower) * i / 49.0);
  const auto lambdas = params.reals("lambda", grid);
  for (double lam : lambdas) {
    if (lam < lower) throw DomainError("lambda " + format_number(lam) + " is below the admissible limit");
  }

  std::vector<ProbVector> dists;
  for (std::size_t i = 0; i < reps; ++i) {
    RandomStream stream(cfg.seed, StreamPurpose::parameters, i);
    switch (gen) {
      case ParamGenerator::boundary_heavy: dists.push_back(boundary_heavy_simplex(K, stream)); break;
      case ParamGenerator::uniform: dists.push_back(ProbVector::uniform(K)); break;
      default: dists.push_back(random_simplex(K, stream)); break;
    }
  }
  std::size_t violations = 0;
  for (double lam : lambdas) {
    const double upper = mgf_upper(lam, K);
    double worst = 0.0;
    for (const auto& p : dists) {
      const double exact = mgf_exact(lam, p).value;
      worst = std::max(worst, exact / upper);
      if (exact > upper * (1.0 + 1e-12)) ++violations;
    }
    out.rows.push_back(value_row("mgf-verify", K, std::nullopt, std::nullopt,
                                 "max-ratio@" + lambda_tag(lam), worst, worst <= 1.0 + 1e-12));
  }
  out.rows.push_back(value_row("mgf-verify", K, std::nullopt, std::nullopt, "violations",
                               static_cast<double>(violations), violations == 0));
  if (violations) out.failures.push_back("mgf-verify: " + std::to_string(violations) + " violations");

  if (K >= 5) {
    const auto a = appendix_g_check(K);
    out.rows.push_back(value_row("mgf-verify", K, std::nullopt, std::nullopt, "g-min", a.min_g, a.nonnegative));
    out.rows.push_back(value_row("mgf-verify", K, std::nullopt, std::nullopt, "g-at-zero", a.g_at_zero, a.zero_at_origin));
    out.rows.push_back(value_row("mgf-verify", K, std::nullopt, std::nullopt, "dg-at-zero", a.dg_at_zero, a.zero_at_origin));
    if (!a.passed()) out.failures.push_back("mgf-verify: g check failed");
  }
}

void run_oracle(const RunConfig& cfg, Params& params, RunOutcome& out) {
  const std::size_t K = params.size("K");
  OracleConfig oc;
  oc.seed = cfg.seed;
  oc.workers = cfg.workers;
  const auto var = variance_max_oracle(K, oc);
  const bool asserted = K >= 5;
  out.rows.push_back(value_row("oracle", K, std::nullopt, std::nullopt, "variance-oracle", var.oracle_value));
  out.rows.push_back(value_row("oracle", K, std::nullopt, std::nullopt, "variance-closed-form", var.max_value));
  out.rows.push_back(value_row("oracle", K, std::nullopt, std::nullopt, "variance-gap", var.gap,
                               asserted ? std::optional<bool>(std::abs(var.gap) <= 1e-6) : std::nullopt,
                               asserted ? "" : "no-closed-form-claim"));
  if (asserted && std::abs(var.gap) > 1e-6) out.failures.push_back("oracle: variance gap " + format_number(var.gap));
  if (!asserted) {
    if (params.has("lambda")) throw DomainError("the F objective needs K >= 5");
    return;
  }
  const double b = bstar(K);
  const auto lambdas = params.reals("lambda", std::vector<double>{-0.99 / b, -0.001, 0.1, 0.5, 1.0, 2.0});
  for (double lam : lambdas) {
    const auto f = f_max_oracle(lam, K, oc);
    const std::string tag = "@" + lambda_tag(lam);
    out.rows.push_back(value_row("oracle", K, std::nullopt, std::nullopt, "f-oracle" + tag, f.oracle_value));
    out.rows.push_back(value_row("oracle", K, std::nullopt, std::nullopt, "f-closed-form" + tag, f.max_value));
    out.rows.push_back(value_row("oracle", K, std::nullopt, std::nullopt, "f-gap" + tag, f.gap, std::abs(f.gap) <= 1e-6));
    if (std::abs(f.gap) > 1e-6) out.failures.push_back("oracle: F gap " + format_number(f.gap) + " at " + lambda_tag(lam));
  }
}

void run_counterexample(const RunConfig&, Params& params, RunOutcome& out) {
  const std::size_t K = params.size("K");
  const std::size_t n = params.size("n");
  const auto eps = positive_epsilons(params);
  const double c_be = params.real("c_be", kBerryEsseenConstant);
  for (double e : eps) {
    const auto r = counterexample_exact_tail(K, n, e, c_be);
    out.rows.push_back(value_row("counterexample", K, n, e, "exact-two-sided", r.exact_tail));
    out.rows.push_back(value_row("counterexample", K, n, e, "exact-left", r.exact_left));
    out.rows.push_back(value_row("counterexample", K, n, e, "exact-right", r.exact_right));
    out.rows.push_back(value_row("counterexample", K, n, e, "normal-floor", r.normal_floor));
    out.rows.push_back(value_row("counterexample", K, n, e, "variance", r.variance));
  }
}

void run_misspecified(const RunConfig& cfg, Params& params, RunOutcome& out) {
  const std::size_t K = params.size("K", 5);
  const std::size_t n = params.size("n", 200);
  const std::size_t groups = params.size("groups", 2);
  const auto eps = positive_epsilons(params);
  const auto gen = generator(params, "random");
  const std::size_t reps = params.size("reps", 100000);
  if (groups < 1 || groups > n) throw ConfigError("groups must lie in [1, n]");
  const auto members = generate_params(gen, K, n, cfg.seed).members();
  std::vector<Group> split(groups);
  for (std::size_t i = 0; i < n; ++i) split[i * groups / n].members.push_back(members[i]);
  const GroupedParamSet g(std::move(split));

  for (const auto& est : misspecified_tail(g, {reps, eps, cfg.seed, cfg.workers})) {
    add_frequency_rows(out.rows, "misspecified", K, n, est);
    for (const auto& b : est.bound_rows) {
      out.rows.push_back(bound_row("misspecified", K, n, est.epsilon, b));
    }
    check_dominance(out, "misspecified", est);
  }

  const double lower = lambda_domain(std::max<std::size_t>(K, 5)).lower;
  const auto lambdas = params.reals("lambda", std::vector<double>{0.99 * lower, -0.001, 0.01, 0.1, 0.5});
  for (const auto& row : grouped_mgf_check(g, lambdas)) {
    const std::string tag = "@group=" + std::to_string(row.group) + ";" + lambda_tag(row.lambda);
    out.rows.push_back(value_row("misspecified", K, n, std::nullopt, "grouped-mgf-exact" + tag, row.exact, row.amgm_holds));
    out.rows.push_back(value_row("misspecified", K, n, std::nullopt, "grouped-mgf-pooled" + tag, row.pooled_power));
    out.rows.push_back(value_row("misspecified", K, n, std::nullopt, "grouped-mgf-upper" + tag, row.uniform_upper,
                                 row.admissible ? std::optional<bool>(row.upper_holds) : std::nullopt,
                                 row.admissible ? "" : "inadmissible"));
    if (!row.amgm_holds || (row.admissible && !row.upper_holds)) {
      out.failures.push_back("misspecified: grouped MGF chain broken" + tag);
    }
  }
}

void run_coding(const RunConfig& cfg, Params& params, RunOutcome& out) {
  const ProbVector p = source_distribution(params);
  const std::size_t K = p.size();
  const std::size_t n = params.size("n");
  const auto eps = positive_epsilons(params);
  const double delta = params.real("delta", 0.5);
  const std::size_t reps = params.size("reps", 100000);
  const SourceModel model{p, n};
  const double h = entropy(p, LogBase::bits);
  const auto content = essential_bit_content(model, delta);
  const double rate = content.h_delta / static_cast<double>(n);

  out.rows.push_back(value_row("coding", K, n, std::nullopt, "entropy-bits", h));
  out.rows.push_back(value_row("coding", K, n, std::nullopt, "h-delta", content.h_delta));
  out.rows.push_back(value_row("coding", K, n, std::nullopt, "h-delta-rate", rate));
  for (double e : eps) {
    const auto t = source_coding_thresholds(K, delta, e);
    const auto dn = static_cast<double>(n);
    out.rows.push_back(value_row("coding", K, n, e, "n-upper", t.n_upper,
                                 dn > t.n_upper ? std::optional<bool>(rate < h + e) : std::nullopt));
    out.rows.push_back(value_row("coding", K, n, e, "n-lower", t.n_lower,
                                 dn > t.n_lower ? std::optional<bool>(rate > h - e) : std::nullopt));
    if (dn > t.n_upper && !(rate < h + e)) out.failures.push_back("coding: upper source-coding claim fails");
    if (dn > t.n_lower && !(rate > h - e)) out.failures.push_back("coding: lower source-coding claim fails");

    const auto t1 = typical_set_stats(model, e, Typicality::t1);
    out.rows.push_back(value_row("coding", K, n, e, "t1-log2-size", t1.log2_size, t1.counting_bound_holds));
    out.rows.push_back(value_row("coding", K, n, e, "t1-mass", t1.prob_mass));
    if (!t1.counting_bound_holds) out.failures.push_back("coding: T1 counting bound fails");

    std::optional<BlockCode> code;
    try {
      code.emplace(model, e);
    } catch (const VacuousCode&) {
      Row r = value_row("coding", K, n, e, "code-bits", std::ceil(dn * (h + e)), false, "vacuous");
      out.rows.push_back(std::move(r));
      continue;
    }
    const auto err = code_error(*code, reps, cfg.seed, cfg.workers);
    out.rows.push_back(value_row("coding", K, n, e, "code-bits", static_cast<double>(code->codeword_bits()), true));
    out.rows.push_back(value_row("coding", K, n, e, "code-exact-error", err.exact_error, err.exact_within_bound));
    Row mc = value_row("coding", K, n, e, "code-mc-error", err.mc_error, err.mc_matches_exact);
    mc.ci_lo = std::max(0.0, err.mc_error - err.ci_halfwidth);
    mc.ci_hi = std::min(1.0, err.mc_error + err.ci_halfwidth);
    out.rows.push_back(std::move(mc));
    out.rows.push_back(value_row("coding", K, n, e, "code-bound", err.bound));
    const auto trip = sampled_roundtrip(*code, std::min<std::size_t>(reps, 100000), cfg.seed);
    out.rows.push_back(value_row("coding", K, n, e, "roundtrip-failures", static_cast<double>(trip.failures),
                                 trip.failures == 0));
    if (!err.exact_within_bound) out.failures.push_back("coding: exact error exceeds the bound");
    if (!err.mc_matches_exact) out.failures.push_back("coding: Monte Carlo error disagrees with the exact error");
    if (trip.failures) out.failures.push_back("coding: roundtrip failures");
  }
}

void run_exponent(const RunConfig&, Params& params, RunOutcome& out) {
  const ProbVector p = source_distribution(params);
  const auto eps = positive_epsilons(params);
  const auto ns = params.sizes("n", std::vector<std::size_t>{100});
  const auto Ks = params.sizes("K", std::vector<std::size_t>{p.size()});
  out.axis = CurveAxis::n;
  for (double e : eps) {
    const auto r = error_exponent(p, e);
    out.rows.push_back(value_row("exponent", p.size(), std::nullopt, e, "divergence", r.divergence, r.feasible,
                                 r.feasible ? "" : "infeasible"));
    if (r.feasible) out.rows.push_back(value_row("exponent", p.size(), std::nullopt, e, "tilt", r.tilt));
    const auto cmp = compare_exponents(p, e, ns, Ks);
    for (const auto& row : cmp.rows) {
      out.rows.push_back(value_row("exponent", row.K, row.n, e, "classical", row.classical, !row.classical_vacuous));
      out.rows.push_back(value_row("exponent", row.K, row.n, e, "block-code-bound", row.block_code_bound, row.block_code_bound < 1.0));
    }
    for (const auto& [K, n] : cmp.crossovers) {
      Row r = value_row("exponent", K, std::nullopt, e, "crossover-n", n ? static_cast<double>(*n) : 0.0, n.has_value());
      if (!n) r.value.reset();
      out.rows.push_back(std::move(r));
    }
  }
}

void write_table(const RunConfig& cfg, const RunOutcome& outcome, std::ostream& out) {
  if (cfg.format == "json") {
    write_json(out, outcome.config, outcome.rows);
  } else {
    write_csv(out, outcome.config, outcome.rows);
  }
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  return f;
}

}  // namespace

std::string_view to_string(Command command) noexcept {
  return kCommandNames[static_cast<std::size_t>(command)];
}

Command parse_command(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kCommandNames); ++i) {
    if (kCommandNames[i] == name) return static_cast<Command>(i);
  }
  throw ConfigError("unknown command '" + std::string(name) + "'");
}

std::vector<std::string_view> command_names() {
  return {std::begin(kCommandNames), std::end(kCommandNames)};
}

const std::vector<std::string>& command_keys(Command command) {
  static const std::map<Command, std::vector<std::string>> keys = {
      {Command::bounds, {"K", "n", "eps", "base", "gen"}},
      {Command::mc_tail, {"K", "n", "eps", "reps", "gen"}},
      {Command::mgf_verify, {"K", "lambda", "reps", "gen"}},
      {Command::oracle, {"K", "lambda"}},
      {Command::counterexample, {"K", "n", "eps", "c_be"}},
      {Command::misspecified, {"K", "n", "eps", "reps", "gen", "groups", "lambda"}},
      {Command::coding, {"K", "p", "n", "eps", "delta", "reps"}},
      {Command::exponent, {"K", "p", "n", "eps"}},
  };
  return keys.at(command);
}

std::map<std::string, std::string> parse_config_text(std::istream& in) {
  std::map<std::string, std::string> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    }
    const auto key = trim(std::string_view(text).substr(0, eq));
    const auto value = trim(std::string_view(text).substr(eq + 1));
    auto [it, fresh] = values.try_emplace(key, value);
    if (fresh) continue;
    if (std::find(kListKeys.begin(), kListKeys.end(), key) == kListKeys.end()) {
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    it->second += "," + value;
  }
  return values;
}

RunConfig make_run_config(const std::map<std::string, std::string>& values) {
  const auto cmd = values.find("command");
  if (cmd == values.end()) throw ConfigError("missing 'command'");
  RunConfig cfg;
  cfg.command = parse_command(cmd->second);
  const auto& allowed = command_keys(cfg.command);
  for (const auto& [key, value] : values) {
    if (std::find(kGlobalKeys.begin(), kGlobalKeys.end(), key) != kGlobalKeys.end()) continue;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("key '" + key + "' is not accepted by '" + cmd->second + "'");
    }
    cfg.parameters[key] = value;
  }
  if (auto it = values.find("seed"); it != values.end()) cfg.seed = parse_unsigned("seed", it->second);
  if (auto it = values.find("workers"); it != values.end()) {
    cfg.workers = static_cast<std::size_t>(parse_unsigned("workers", it->second));
    if (cfg.workers < 1) throw ConfigError("workers must be at least 1");
  }
  if (auto it = values.find("out"); it != values.end()) cfg.output = it->second;
  if (auto it = values.find("curves"); it != values.end()) cfg.curves = it->second;
  if (auto it = values.find("format"); it != values.end()) cfg.format = it->second;
  if (cfg.format != "csv" && cfg.format != "json") throw ConfigError("format must be csv or json");
  return cfg;
}

RunOutcome execute(const RunConfig& cfg) {
  const auto& allowed = command_keys(cfg.command);
  for (const auto& [key, value] : cfg.parameters) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("key '" + key + "' is not accepted by '" + std::string(to_string(cfg.command)) + "'");
    }
  }
  if (cfg.workers < 1) throw ConfigError("workers must be at least 1");
  Params params(cfg.parameters);
  RunOutcome out;
  try {
    switch (cfg.command) {
      case Command::bounds: run_bounds(cfg, params, out); break;
      case Command::mc_tail: run_mc_tail(cfg, params, out); break;
      case Command::mgf_verify: run_mgf_verify(cfg, params, out); break;
      case Command::oracle: run_oracle(cfg, params, out); break;
      case Command::counterexample: run_counterexample(cfg, params, out); break;
      case Command::misspecified: run_misspecified(cfg, params, out); break;
      case Command::coding: run_coding(cfg, params, out); break;
      case Command::exponent: run_exponent(cfg, params, out); break;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    // Library argument checks surface as configuration problems here.
    throw ConfigError(e.what());
  }
  out.config.emplace_back("command", std::string(to_string(cfg.command)));
  out.config.emplace_back("version", std::string(kVersion));
  out.config.emplace_back("seed", std::to_string(cfg.seed));
  for (const auto& [key, value] : params.resolved()) out.config.emplace_back(key, value);
  return out;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& diag) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome outcome;
  try {
    outcome = execute(cfg);
  } catch (const ConfigError& e) {
    diag << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Infeasible& e) {
    diag << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const DomainError& e) {
    diag << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const BoundaryParameter& e) {
    diag << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const Error& e) {
    diag << "error: " << e.what() << '\n';
    return kExitError;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const int status = outcome.failures.empty() ? kExitOk : kExitAssertion;

  try {
    if (cfg.output.empty()) {
      write_table(cfg, outcome, out);
    } else {
      auto f = open_output(cfg.output);
      write_table(cfg, outcome, f);
      nlohmann::ordered_json manifest;
      manifest["version"] = kVersion;
      nlohmann::ordered_json config;
      for (const auto& [key, value] : outcome.config) config[key] = value;
      config["workers"] = std::to_string(cfg.workers);
      config["format"] = cfg.format;
      manifest["config"] = std::move(config);
      manifest["seed"] = cfg.seed;
      manifest["workers"] = cfg.workers;
      manifest["wall_time_seconds"] = wall;
      manifest["exit_status"] = status;
      auto m = open_output(cfg.output + ".manifest.json");
      m << manifest.dump(2) << '\n';
    }
    if (!cfg.curves.empty()) {
      auto c = open_output(cfg.curves);
      emit_curves(c, curve_points(outcome.rows, outcome.axis));
    }
  } catch (const Error& e) {
    diag << "error: " << e.what() << '\n';
    return kExitError;
  }
  for (const auto& f : outcome.failures) diag << "assertion failed: " << f << '\n';
  return status;
}

}  // namespace entconc
