// SPDX-License-Identifier: Apache-2.0
#include "entconc/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <thread>

#include "entconc/error.hpp"
#include "entconc/mgf.hpp"
#include "entconc/rng.hpp"

namespace entconc {

namespace {

constexpr std::size_t kReplicateBlock = 4096;

struct MemberTable {
  CategoricalSampler sampler;
  std::vector<double> scores;
};

// Score tables deduplicated across members; most parameter sets repeat a
// handful of distributions.
struct PreparedModel {
  std::vector<MemberTable> tables;
  std::vector<std::uint32_t> member_table;
};

PreparedModel prepare(const std::vector<ProbVector>& truth,
                      const std::vector<const ProbVector*>& model) {
  PreparedModel prepared;
  std::map<std::vector<double>, std::uint32_t> seen;
  prepared.member_table.reserve(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    std::vector<double> key(truth[i].begin(), truth[i].end());
    key.insert(key.end(), model[i]->begin(), model[i]->end());
    auto [it, inserted] = seen.try_emplace(std::move(key),
                                           static_cast<std::uint32_t>(prepared.tables.size()));
    if (inserted) {
      prepared.tables.push_back({CategoricalSampler(truth[i]), centered_scores(truth[i], *model[i])});
    }
    prepared.member_table.push_back(it->second);
  }
  return prepared;
}

std::vector<double> run_replicates(const PreparedModel& model, const SimulationSettings& sim) {
  const std::size_t reps = sim.replicates;
  const std::size_t n = model.member_table.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> means(reps);
  const std::size_t blocks = (reps + kReplicateBlock - 1) / kReplicateBlock;

  auto run_blocks = [&](std::size_t first_block, std::size_t stride) {
    for (std::size_t b = first_block; b < blocks; b += stride) {
      const std::size_t end = std::min(reps, (b + 1) * kReplicateBlock);
      for (std::size_t r = b * kReplicateBlock; r < end; ++r) {
        RandomStream stream(sim.seed, StreamPurpose::replicate, r);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const auto& t = model.tables[model.member_table[i]];
          sum += t.scores[t.sampler(stream)];
        }
        means[r] = sum * inv_n;
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(sim.workers, 1, std::max<std::size_t>(blocks, 1));
  if (workers == 1) {
    run_blocks(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run_blocks, w, workers);
    for (auto& t : pool) t.join();
  }
  return means;
}

TailEstimate count_tails(const std::vector<double>& means, double epsilon) {
  TailEstimate e;
  e.epsilon = epsilon;
  e.replicates = means.size();
  for (double m : means) {
    if (m >= epsilon) ++e.count_right;
    if (m <= -epsilon) ++e.count_left;
    if (std::abs(m) >= epsilon) ++e.count_two_sided;
  }
  const auto r = static_cast<double>(e.replicates);
  e.freq_left = static_cast<double>(e.count_left) / r;
  e.freq_right = static_cast<double>(e.count_right) / r;
  e.freq_two_sided = static_cast<double>(e.count_two_sided) / r;
  e.ci_left = ci_halfwidth(e.freq_left, e.replicates);
  e.ci_right = ci_halfwidth(e.freq_right, e.replicates);
  e.ci_two_sided = ci_halfwidth(e.freq_two_sided, e.replicates);
  return e;
}

double log_binomial_half(std::size_t n, std::size_t b) {
  const auto nn = static_cast<double>(n);
  const auto bb = static_cast<double>(b);
  return std::lgamma(nn + 1.0) - std::lgamma(bb + 1.0) - std::lgamma(nn - bb + 1.0) -
         nn * std::numbers::ln2;
}

}  // namespace

std::string_view to_string(ParamGenerator gen) noexcept {
  switch (gen) {
    case ParamGenerator::uniform: return "uniform";
    case ParamGenerator::counterexample: return "counterexample";
    case ParamGenerator::random_simplex: return "random";
    case ParamGenerator::boundary_heavy: return "boundary";
  }
  return "?";
}

ParamGenerator parse_generator(std::string_view name) {
  if (name == "uniform") return ParamGenerator::uniform;
  if (name == "counterexample") return ParamGenerator::counterexample;
  if (name == "random" || name == "random-simplex") return ParamGenerator::random_simplex;
  if (name == "boundary" || name == "boundary-heavy") return ParamGenerator::boundary_heavy;
  throw InvalidArgument("unknown generator '" + std::string(name) + "'");
}

ParamSet generate_params(ParamGenerator gen, std::size_t K, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("n must be at least 1");
  switch (gen) {
    case ParamGenerator::uniform:
      return ParamSet::repeated(ProbVector::uniform(K), n);
    case ParamGenerator::counterexample:
      return counterexample_params(K, n);
    case ParamGenerator::random_simplex:
    case ParamGenerator::boundary_heavy: {
      std::vector<ProbVector> members;
      members.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        RandomStream stream(seed, StreamPurpose::parameters, i);
        members.push_back(gen == ParamGenerator::random_simplex
                              ? random_simplex(K, stream)
                              : boundary_heavy_simplex(K, stream));
      }
      return ParamSet(std::move(members));
    }
  }
  throw InvalidArgument("unknown generator");
}

void SimulationSettings::validate() const {
  if (replicates < 1) throw InvalidArgument("replicates must be at least 1");
  if (epsilons.empty()) throw InvalidArgument("at least one epsilon is required");
  for (double e : epsilons) {
    if (!(e > 0.0) || !std::isfinite(e)) throw InvalidArgument("epsilons must be positive");
  }
}

double TailEstimate::frequency(Side side) const noexcept {
  switch (side) {
    case Side::left: return freq_left;
    case Side::right: return freq_right;
    case Side::two_sided: return freq_two_sided;
  }
  return freq_two_sided;
}

double TailEstimate::ci_halfwidth(Side side) const noexcept {
  switch (side) {
    case Side::left: return ci_left;
    case Side::right: return ci_right;
    case Side::two_sided: return ci_two_sided;
  }
  return ci_two_sided;
}

double ci_halfwidth(double frequency, std::size_t replicates) noexcept {
  const auto r = static_cast<double>(replicates);
  if (frequency <= 0.0) return 3.0 / r;
  return 3.0 * std::sqrt(frequency * (1.0 - frequency) / r);
}

std::vector<double> simulate_means(const ParamSet& params, const SimulationSettings& sim) {
  if (sim.replicates < 1) throw InvalidArgument("replicates must be at least 1");
  std::vector<const ProbVector*> model;
  model.reserve(params.size());
  for (const auto& p : params) model.push_back(&p);
  return run_replicates(prepare(params.members(), model), sim);
}

std::vector<TailEstimate> estimate_tail(const ExperimentConfig& config) {
  config.sim.validate();
  const auto means = simulate_means(config.params, config.sim);
  std::vector<TailEstimate> out;
  for (double eps : config.sim.epsilons) {
    auto est = count_tails(means, eps);
    TailQuery q{config.params.size(), config.params.alphabet_size(), eps};
    est.bound_rows = compare_bounds(q, &config.params);
    out.push_back(std::move(est));
  }
  return out;
}

std::vector<BoundReport> dominance_violations(const TailEstimate& estimate) {
  std::vector<BoundReport> bad;
  for (const auto& row : estimate.bound_rows) {
    if (!row.applicable || !row.valid) continue;
    if (estimate.frequency(row.side) > row.value + estimate.ci_halfwidth(row.side)) {
      bad.push_back(row);
    }
  }
  return bad;
}

ParamSet counterexample_params(std::size_t K, std::size_t n) {
  if (K < 3) throw InvalidArgument("counterexample needs K >= 3");
  if (n < 1) throw InvalidArgument("n must be at least 1");
  std::vector<double> p(K, 1.0 / (2.0 * static_cast<double>(K - 1)));
  p[0] = 0.5;
  return ParamSet::repeated(ProbVector(std::move(p)), n);
}

CounterexampleReport counterexample_exact_tail(std::size_t K, std::size_t n, double epsilon,
                                               double c_be) {
  if (K < 3) throw InvalidArgument("counterexample needs K >= 3");
  if (n < 1 || n > 1'000'000) throw InvalidArgument("counterexample needs 1 <= n <= 1e6");
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  CounterexampleReport r;
  r.K = K;
  r.n = n;
  r.epsilon = epsilon;
  r.c_be = c_be;
  const double spread = std::log(static_cast<double>(K - 1));
  const auto nn = static_cast<double>(n);
  for (std::size_t b = 0; b <= n; ++b) {
    const double value = spread / (2.0 * nn) * (2.0 * static_cast<double>(b) - nn);
    if (std::abs(value) < epsilon) continue;
    const double prob = std::exp(log_binomial_half(n, b));
    r.exact_tail += prob;
    if (value >= epsilon) r.exact_right += prob;
    if (value <= -epsilon) r.exact_left += prob;
  }
  r.exact_tail = std::min(r.exact_tail, 1.0);
  r.variance = spread * spread / (4.0 * nn);
  r.normal_floor = berry_esseen_floor(K, n, epsilon, c_be);
  return r;
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double berry_esseen_floor(std::size_t K, std::size_t n, double epsilon, double c_be) {
  if (K < 3) throw InvalidArgument("counterexample needs K >= 3");
  const double rn = std::sqrt(static_cast<double>(n));
  const double spread = std::log(static_cast<double>(K - 1));
  return std::max(0.0, normal_cdf(-2.0 * rn * epsilon / spread) - c_be / rn);
}

GroupedParamSet::GroupedParamSet(std::vector<Group> groups) : groups_(std::move(groups)) {
  if (groups_.empty()) throw InvalidArgument("grouped parameter set needs a group");
  const std::size_t k = groups_.front().members.empty() ? 0 : groups_.front().members.front().size();
  for (const auto& g : groups_) {
    if (g.members.empty()) throw InvalidArgument("every group needs at least one member");
    for (const auto& p : g.members) {
      if (p.size() != k) throw InvalidArgument("grouped parameter set mixes alphabet sizes");
      if (!p.on_simplex()) throw InvalidArgument("members must lie on the simplex");
    }
    total_ += g.members.size();
  }
}

ParamSet GroupedParamSet::flattened() const {
  std::vector<ProbVector> all;
  all.reserve(total_);
  for (const auto& g : groups_) all.insert(all.end(), g.members.begin(), g.members.end());
  return ParamSet(std::move(all));
}

std::vector<ProbVector> pooled_params(const GroupedParamSet& g) {
  std::vector<ProbVector> pooled;
  pooled.reserve(g.groups().size());
  for (const auto& group : g.groups()) {
    std::vector<double> mean(group.members.front().begin(), group.members.front().end());
    for (std::size_t j = 1; j < group.members.size(); ++j) {
      const double inv = 1.0 / static_cast<double>(j + 1);
      for (std::size_t k = 0; k < mean.size(); ++k) {
        mean[k] += (group.members[j][k] - mean[k]) * inv;
      }
    }
    pooled.emplace_back(std::move(mean));
  }
  return pooled;
}

std::vector<double> simulate_misspecified_means(const GroupedParamSet& g,
                                                const SimulationSettings& sim) {
  if (sim.replicates < 1) throw InvalidArgument("replicates must be at least 1");
  const auto pooled = pooled_params(g);
  std::vector<ProbVector> truth;
  std::vector<const ProbVector*> model;
  truth.reserve(g.size());
  model.reserve(g.size());
  for (std::size_t i = 0; i < g.groups().size(); ++i) {
    for (const auto& p : g.groups()[i].members) {
      truth.push_back(p);
      model.push_back(&pooled[i]);
    }
  }
  return run_replicates(prepare(truth, model), sim);
}

std::vector<TailEstimate> misspecified_tail(const GroupedParamSet& g,
                                            const SimulationSettings& sim) {
  sim.validate();
  const auto means = simulate_misspecified_means(g, sim);
  std::vector<TailEstimate> out;
  for (double eps : sim.epsilons) {
    auto est = count_tails(means, eps);
    TailQuery q{g.size(), g.alphabet_size(), eps};
    est.bound_rows = {main_bound(q), right_tail_uniform(q), left_tail_uniform(q)};
    out.push_back(std::move(est));
  }
  return out;
}

double grouped_mgf_exact(const Group& group, const ProbVector& pooled, double lambda) {
  if (!(lambda > -1.0)) throw DomainError("lambda must exceed -1");
  if (lambda == 0.0) return 1.0;
  const double center = negentropy(pooled);
  double log_total = 0.0;
  for (const auto& p : group.members) {
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (p[k] == 0.0) continue;
      if (pooled[k] == 0.0) throw InvalidArgument("pooled parameter misses a reachable category");
      s += p[k] * std::exp(lambda * (std::log(pooled[k]) - center));
    }
    log_total += std::log(s);
  }
  return std::exp(log_total);
}

std::vector<GroupedMgfRow> grouped_mgf_check(const GroupedParamSet& g,
                                             const std::vector<double>& lambdas) {
  const auto pooled = pooled_params(g);
  const std::size_t k = std::max<std::size_t>(g.alphabet_size(), 5);
  const double lk = std::log(static_cast<double>(k));
  const double lower = lambda_domain(k).lower;
  constexpr double kRelTol = 1e-12;
  std::vector<GroupedMgfRow> rows;
  for (std::size_t i = 0; i < g.groups().size(); ++i) {
    const auto ni = static_cast<double>(g.groups()[i].members.size());
    for (double lam : lambdas) {
      GroupedMgfRow row;
      row.group = i;
      row.lambda = lam;
      row.exact = grouped_mgf_exact(g.groups()[i], pooled[i], lam);
      row.pooled_power = std::pow(mgf_exact(lam, pooled[i]).value, ni);
      row.uniform_upper = std::exp(ni * lam * lam * lk * lk);
      row.admissible = lam >= lower;
      row.amgm_holds = row.exact <= row.pooled_power * (1.0 + kRelTol);
      row.upper_holds = row.pooled_power <= row.uniform_upper * (1.0 + kRelTol);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace entconc
