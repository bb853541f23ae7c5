// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails. Heavy simulations write their tables under --workdir so the
// determinism criterion can compare files byte for byte.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "entconc/bounds.hpp"
#include "entconc/cli.hpp"
#include "entconc/coding.hpp"
#include "entconc/mgf.hpp"
#include "entconc/montecarlo.hpp"
#include "entconc/rng.hpp"
#include "entconc/simplex.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace entconc;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::vector<double> vec(const ProbVector& p) { return {p.begin(), p.end()}; }

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

// Data rows of a table written by `run`. The tables checked here never need
// quoting, so a plain split is enough.
std::vector<std::vector<std::string>> csv_rows(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    rows.push_back(split(line, ','));
  }
  return rows;
}

// Column indices of the shared table schema.
enum Col { kCommand, kK, kN, kEps, kMetric, kValue, kCiLo, kCiHi, kValid, kRegime };

RunConfig config_of(const std::string& text, std::size_t workers, const fs::path& out) {
  std::istringstream in(text);
  RunConfig cfg = make_run_config(parse_config_text(in));
  cfg.workers = workers;
  cfg.output = out.string();
  return cfg;
}

// --- criterion 1 -----------------------------------------------------------
Outcome variance_maximum() {
  Outcome o;
  double worst_value = 0.0, worst_coord = 0.0;
  for (std::size_t K : {5, 6, 8, 16, 32, 64}) {
    const auto t = variance_max_oracle(K);
    const double target = std::pow(std::log(double(K)), 2);
    const double dv = std::abs(t.oracle_value - target);
    double dc = 0.0;
    for (double q : t.maximizer) dc = std::max(dc, std::abs(q - 1.0 / double(K)));
    worst_value = std::max(worst_value, dv);
    worst_coord = std::max(worst_coord, dc);
    if (dv > 1e-6 || dc > 1e-4) {
      o.pass = false;
      o.detail += " K=" + std::to_string(K) + " off;";
    }
  }
  o.detail += " max |value-(log K)^2|=" + fmt("%.3g", worst_value) +
              " max |q-1/K|=" + fmt("%.3g", worst_coord);
  return o;
}

// --- criterion 2 -----------------------------------------------------------
Outcome f_maximum() {
  Outcome o;
  double worst = 0.0;
  for (std::size_t K : {5, 16}) {
    for (double lam : {-0.99 / bstar(K), -0.001, 0.1, 0.5, 1.0, 2.0}) {
      const auto t = f_max_oracle(lam, K);
      const double closed = std::exp(-lam * std::log(double(K))) - 1.0 + lam * std::log(double(K));
      const double d = std::abs(t.oracle_value - closed);
      worst = std::max(worst, d);
      if (d > 1e-6) {
        o.pass = false;
        o.detail += " K=" + std::to_string(K) + " lambda=" + fmt("%g", lam) + " off;";
      }
    }
  }
  o.detail += " max |F_max - closed form|=" + fmt("%.3g", worst);
  return o;
}

// --- criterion 3 -----------------------------------------------------------
Outcome uniform_mgf_bound() {
  Outcome o;
  std::size_t checks = 0, violations = 0;
  double worst_ratio = 0.0;
  for (std::size_t K : {5, 8, 20, 100}) {
    const double lower = lambda_domain(K).lower;
    std::vector<double> lambdas;
    for (int i = 0; i < 50; ++i) lambdas.push_back(0.99 * lower + (2.0 - 0.99 * lower) * i / 49.0);
    std::vector<ProbVector> dists;
    for (std::size_t i = 0; i < 1100; ++i) {
      RandomStream s(0xacce55, StreamPurpose::test, K * 100000 + i);
      dists.push_back(i < 1000 ? random_simplex(K, s) : boundary_heavy_simplex(K, s));
    }
    for (double lam : lambdas) {
      const double upper = mgf_upper(lam, K);
      for (const auto& p : dists) {
        const double exact = mgf_exact(lam, p).value;
        ++checks;
        worst_ratio = std::max(worst_ratio, exact / upper);
        if (!(exact <= upper * (1.0 + 1e-12))) ++violations;
      }
    }
  }
  o.pass = violations == 0;
  o.detail = " " + std::to_string(violations) + " violations in " + std::to_string(checks) +
             " checks, max exact/upper=" + fmt("%.6f", worst_ratio);
  return o;
}

// --- criterion 4 -----------------------------------------------------------
const char* const kTailConfigs[] = {
    "command=mc-tail\nK=5\nn=100\neps=0.1,0.3,0.5\nreps=1000000\ngen=uniform\nseed=101\n",
    "command=mc-tail\nK=8\nn=1000\neps=0.1,0.3,0.5\nreps=1000000\ngen=uniform\nseed=102\n",
    "command=mc-tail\nK=17\nn=16\neps=0.1,0.3,0.5\nreps=1000000\ngen=counterexample\nseed=103\n",
    "command=mc-tail\nK=5\nn=200\neps=0.1,0.3,0.5\nreps=1000000\ngen=boundary-heavy\nseed=104\n",
};

const char* const kMisspecifiedConfig =
    "command=misspecified\nK=5\nn=200\ngroups=2\neps=0.2,0.4\nreps=1000000\ngen=random\nseed=107\n";

fs::path tail_file(const fs::path& dir, std::size_t i, std::size_t workers) {
  return dir / ("c4_config" + std::to_string(i) + "_w" + std::to_string(workers) + ".csv");
}

fs::path misspecified_file(const fs::path& dir, std::size_t workers) {
  return dir / ("c7_w" + std::to_string(workers) + ".csv");
}

Outcome tail_vs_bound(const fs::path& dir) {
  Outcome o;
  std::size_t compared = 0, exact_rows = 0;
  double max_slack_use = 0.0;  // largest frequency / (bound + CI) over valid bounds
  for (std::size_t i = 0; i < std::size(kTailConfigs); ++i) {
    const auto path = tail_file(dir, i, 1);
    std::ostringstream sink, diag;
    const int status = run(config_of(kTailConfigs[i], 1, path), sink, diag);
    if (status != kExitOk) {
      o.pass = false;
      o.detail += " config " + std::to_string(i) + " exit " + std::to_string(status) + ": " + diag.str();
      continue;
    }
    // Cross-check the run's own verdict from the written table.
    const auto rows = csv_rows(path);
    for (const auto& freq : rows) {
      if (freq[kMetric].rfind("freq-", 0) != 0) continue;
      const std::string side = freq[kMetric].substr(5);
      const double f = std::stod(freq[kValue]);
      const double half = std::stod(freq[kCiHi]) - f;
      for (const auto& b : rows) {
        if (b[kEps] != freq[kEps] || b[kValid] != "true" || b[kValue].empty()) continue;
        if (b[kMetric].rfind("freq-", 0) == 0 || b[kMetric].rfind("exact-", 0) == 0) continue;
        // Bound rows carry their side in the family name or cover both sides.
        const bool right = b[kMetric].find("right") != std::string::npos;
        const bool left = b[kMetric].find("left") != std::string::npos;
        const std::string bside = right ? "right" : left ? "left" : "two-sided";
        if (bside != side) continue;
        const double bound = std::stod(b[kValue]);
        ++compared;
        max_slack_use = std::max(max_slack_use, f / (bound + std::max(half, 0.0)));
        if (f > bound + std::max(half, 0.0)) {
          o.pass = false;
          o.detail += " config " + std::to_string(i) + " " + b[kMetric] + " violated;";
        }
      }
      if (freq[kMetric] == "freq-two-sided") {
        for (const auto& e : rows) {
          if (e[kEps] == freq[kEps] && e[kMetric] == "exact-two-sided") {
            ++exact_rows;
            if (e[kValid] != "true") {
              o.pass = false;
              o.detail += " counterexample mismatch at eps " + e[kEps] + ";";
            }
          }
        }
      }
    }
  }
  if (exact_rows != 3) {
    o.pass = false;
    o.detail += " expected 3 exact counterexample rows, found " + std::to_string(exact_rows) + ";";
  }
  o.detail += " " + std::to_string(compared) + " frequency/bound pairs, max freq/(bound+CI)=" +
              fmt("%.4f", max_slack_use) + ", counterexample within 3 sigma";
  return o;
}

// --- criterion 5 -----------------------------------------------------------
Outcome rate_witness() {
  Outcome o;
  for (std::size_t n : {16, 64, 256}) {
    const auto K = static_cast<std::size_t>(std::ceil(std::exp(std::sqrt(double(n))))) + 1;
    const auto r = counterexample_exact_tail(K, n, 0.1);
    o.detail += " n=" + std::to_string(n) + ",K=" + std::to_string(K) + ":" + fmt("%.5f", r.exact_tail);
    if (!(r.exact_tail >= 0.3)) o.pass = false;
  }
  return o;
}

// --- criterion 6 -----------------------------------------------------------
Outcome bound_improvement() {
  Outcome o;
  const TailQuery q{100, 5, 0.5};
  const double main = main_bound(q).value;
  const double zhao = zhao2020_bound(q).value;
  const double l2 = std::pow(std::log(5.0), 2);
  const double main_ref = 2.0 * std::exp(-100.0 * 0.25 / (4.0 * l2));
  // Reference evaluated independently of the library and frozen.
  const double zhao_ref = 6.3473641894028185;
  const bool close = std::abs(main / main_ref - 1) <= 1e-5 && std::abs(zhao / zhao_ref - 1) <= 1e-5;
  o.pass = close && main < 1.0 && zhao > 1.0;
  o.detail = " main=" + fmt("%.5f", main) + " (quoted 0.17916) zhao2020=" + fmt("%.4f", zhao) +
             " (quoted 6.3476)";
  return o;
}

// --- criterion 7 -----------------------------------------------------------
Outcome misspecified(const fs::path& dir) {
  Outcome o;
  const auto path = misspecified_file(dir, 1);
  std::ostringstream sink, diag;
  const int status = run(config_of(kMisspecifiedConfig, 1, path), sink, diag);
  if (status != kExitOk) {
    o.pass = false;
    o.detail += " run exit " + std::to_string(status) + ": " + diag.str();
  }
  const double l2 = std::pow(std::log(5.0), 2);
  std::size_t seen = 0;
  for (const auto& r : csv_rows(path)) {
    if (r[kMetric] != "freq-two-sided") continue;
    const double eps = std::stod(r[kEps]);
    const double bound = 2.0 * std::exp(-200.0 * eps * eps / (4.0 * l2));
    const double f = std::stod(r[kValue]);
    ++seen;
    o.detail += " eps=" + r[kEps] + ": freq " + fmt("%.3g", f) + " <= " + fmt("%.4g", bound) + ";";
    if (!(f <= bound)) o.pass = false;
  }
  if (seen != 2) o.pass = false;

  // Grouped MGF chain on small groups, against explicit enumeration.
  std::size_t chain_checks = 0;
  double worst_rel = 0.0;
  const double lower = lambda_domain(5).lower;
  for (std::size_t ni : {3, 6, 8}) {
    std::vector<Group> groups(2);
    for (std::size_t g = 0; g < 2; ++g) {
      for (std::size_t j = 0; j < ni; ++j) {
        RandomStream s(0x9e0, StreamPurpose::test, 1000 * ni + 100 * g + j);
        groups[g].members.push_back(g == 0 ? random_simplex(5, s) : boundary_heavy_simplex(5, s));
      }
    }
    const GroupedParamSet set(groups);
    const auto pooled = pooled_params(set);
    const std::vector<double> lambdas{0.99 * lower, -0.001, 0.01, 0.1, 0.5, 1.0};
    for (const auto& row : grouped_mgf_check(set, lambdas)) {
      ++chain_checks;
      std::vector<std::vector<double>> members;
      for (const auto& m : groups[row.group].members) members.push_back(vec(m));
      const double enumerated =
          oracle::grouped_mgf_enumerate(members, vec(pooled[row.group]), row.lambda);
      worst_rel = std::max(worst_rel, std::abs(row.exact / enumerated - 1));
      if (std::abs(row.exact / enumerated - 1) > 1e-9 || !row.amgm_holds || !row.admissible ||
          !row.upper_holds) {
        o.pass = false;
        o.detail += " chain fails at n_i=" + std::to_string(ni) + ";";
      }
    }
  }
  o.detail += " grouped chain " + std::to_string(chain_checks) + " checks, enumeration rel err " +
              fmt("%.2g", worst_rel);
  return o;
}

// --- criterion 8 -----------------------------------------------------------
Outcome coding_suite() {
  Outcome o;
  const auto a = essential_bit_content({ProbVector::uniform(2), 4}, 0.2);
  const bool a_ok = a.set_size == 13 && a.h_delta == std::log2(13.0);
  o.detail += " (a) H_delta=" + fmt("%.12f", a.h_delta) + (a_ok ? " ok;" : " wrong;");

  const auto b = verify_source_coding(ProbVector({0.4, 0.3, 0.1, 0.1, 0.1}), 0.5, 1.0, 16, 24);
  bool b_ok = b.passed() && b.rows.size() == 9;
  for (const auto& r : b.rows) b_ok = b_ok && r.upper_checked && r.upper_holds;
  o.detail += " (b) n_upper=" + fmt("%.2f", b.thresholds.n_upper) + (b_ok ? " ok;" : " fails;");

  bool c_ok = false;
  try {
    const BlockCode code({ProbVector({0.7, 0.1, 0.1, 0.05, 0.05}), 20}, 0.3);
    const auto trip = sampled_roundtrip(code, 100000, 2024);
    const auto err = code_error(code, 100000, 2024);
    c_ok = trip.checked == 100000 && trip.failures == 0 && err.exact_within_bound;
    o.detail += " (c) m=" + std::to_string(code.codeword_bits()) + " bits, " +
                std::to_string(trip.failures) + " roundtrip failures, exact error " +
                fmt("%.4f", err.exact_error) + " <= " + fmt("%.4f", err.bound);
  } catch (const Error& e) {
    o.detail += std::string(" (c) ") + e.what();
  }
  o.pass = a_ok && b_ok && c_ok;
  return o;
}

// --- criterion 9 -----------------------------------------------------------
Outcome error_exponents() {
  Outcome o;
  std::size_t compared = 0, infeasible = 0;
  double worst = 0.0;
  for (std::size_t K : {2, 3, 4}) {
    // The oracle grids the first K-2 coordinates and splits the rest exactly.
    // K <= 3 uses a complete 1e-3 grid; K = 4 starts from 1e-2 and refines
    // around the minimum to 1e-5.
    const double coarse = K <= 3 ? 1e-3 : 1e-2;
    const int refinements = K <= 3 ? 2 : 3;
    for (std::size_t i = 0; i < 20; ++i) {
      RandomStream s(0xe4, StreamPurpose::test, 100 * K + i);
      const auto p = random_simplex(K, s);
      const double headroom = std::log2(double(K)) - entropy(p, LogBase::bits);
      for (double frac : {0.1, 0.5, 0.9}) {
        const double eps = frac * headroom;
        if (!(eps > 0.0)) continue;
        const auto r = error_exponent(p, eps);
        const double grid = oracle::kl_grid_min(vec(p), r.target_entropy, coarse, refinements);
        ++compared;
        const double d = std::abs(r.divergence - grid);
        worst = std::max(worst, d);
        if (!r.feasible || d > 1e-4) {
          o.pass = false;
          o.detail += " K=" + std::to_string(K) + " p#" + std::to_string(i) + " off;";
        }
      }
      const auto over = error_exponent(p, 1.01 * headroom + 1e-9);
      ++infeasible;
      if (over.feasible || !std::isinf(over.divergence)) o.pass = false;
    }
    const auto u = error_exponent(ProbVector::uniform(K), 0.01);
    ++infeasible;
    if (u.feasible || !(std::isinf(u.divergence) && u.divergence > 0)) {
      o.pass = false;
      o.detail += " uniform K=" + std::to_string(K) + " not infeasible;";
    }
  }

  std::vector<double> zipf(256);
  double s = 0.0;
  for (std::size_t k = 0; k < 256; ++k) s += zipf[k] = 1.0 / double(k + 1);
  for (auto& v : zipf) v /= s;
  const auto cmp = compare_exponents(ProbVector(zipf), 0.5, {256}, {256});
  const auto& row = cmp.rows.at(0);
  const bool regime_ok = row.classical_vacuous && row.block_code_bound < 1.0;
  if (!regime_ok) o.pass = false;
  o.detail += " " + std::to_string(compared) + " grid comparisons, max |diff|=" + fmt("%.2g", worst) +
              ", " + std::to_string(infeasible) + " infeasible cases at +inf, n=K=256: classical " +
              fmt("%.3g", row.classical) + " vs new " + fmt("%.4f", row.block_code_bound);
  return o;
}

// --- criterion 10 ----------------------------------------------------------
Outcome g_function_checks() {
  Outcome o;
  for (std::size_t K : {5, 10, 50, 1000}) {
    const auto r = appendix_g_check(K, GridSpec{10000, 10.0});
    o.detail += " K=" + std::to_string(K) + ":min g=" + fmt("%.2g", r.min_g) +
                ",g'(0)=" + fmt("%.1g", r.dg_at_zero);
    if (!r.nonnegative || !r.zero_at_origin) o.pass = false;
  }
  return o;
}

// --- criterion 11 ----------------------------------------------------------
Outcome determinism(const fs::path& dir) {
  Outcome o;
  std::size_t compared = 0;
  auto compare = [&](const fs::path& reference, const fs::path& other) {
    ++compared;
    if (!fs::exists(reference) || read_file(reference) != read_file(other)) {
      o.pass = false;
      o.detail += " " + other.filename().string() + " differs;";
    }
  };
  for (std::size_t workers : {4, 16}) {
    for (std::size_t i = 0; i < std::size(kTailConfigs); ++i) {
      const auto path = tail_file(dir, i, workers);
      std::ostringstream sink, diag;
      run(config_of(kTailConfigs[i], workers, path), sink, diag);
      compare(tail_file(dir, i, 1), path);
    }
    const auto path = misspecified_file(dir, workers);
    std::ostringstream sink, diag;
    run(config_of(kMisspecifiedConfig, workers, path), sink, diag);
    compare(misspecified_file(dir, 1), path);
  }
  o.detail += " " + std::to_string(compared) + " files identical to the single-worker run";
  if (!o.pass) o.detail = " mismatch:" + o.detail;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string workdir = "acceptance_out";
  std::vector<int> only;
  app.add_option("--workdir", workdir, "directory for simulation tables");
  app.add_option("--only", only, "run only these criteria (determinism needs 4 and 7)");
  CLI11_PARSE(app, argc, argv);
  const fs::path dir(workdir);
  fs::create_directories(dir);

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, variance_maximum},
      {2, f_maximum},
      {3, uniform_mgf_bound},
      {4, [&] { return tail_vs_bound(dir); }},
      {5, rate_witness},
      {6, bound_improvement},
      {7, [&] { return misspecified(dir); }},
      {8, coding_suite},
      {9, error_exponents},
      {10, g_function_checks},
      {11, [&] { return determinism(dir); }},
  };

  int failures = 0;
  for (const auto& [id, check] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string(" exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ":" << o.detail << " ["
              << fmt("%.1f", secs) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
