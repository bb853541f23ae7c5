// SPDX-License-Identifier: Apache-2.0
#pragma once

// Monte Carlo estimation of tail probabilities of the mean centered
// log-likelihood, the exact law of the rate-optimality construction, and the
// grouped (misspecified) model.
//
// Replicate r draws from its own counter-based stream keyed by (seed, r), so
// results do not depend on how replicates are split across workers.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "entconc/bounds.hpp"
#include "entconc/simplex.hpp"

namespace entconc {

enum class ParamGenerator { uniform, counterexample, random_simplex, boundary_heavy };

std::string_view to_string(ParamGenerator gen) noexcept;
/// Accepts "uniform", "counterexample", "random" and "boundary".
ParamGenerator parse_generator(std::string_view name);

/// Builds n members for a named generator. Random generators draw from the
/// parameter substream family of `seed`.
ParamSet generate_params(ParamGenerator gen, std::size_t K, std::size_t n,
                         std::uint64_t seed);

struct SimulationSettings {
  std::size_t replicates = 1;
  std::vector<double> epsilons;  ///< nats
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  void validate() const;
};

struct ExperimentConfig {
  ParamSet params;
  SimulationSettings sim;
};

struct TailEstimate {
  double epsilon = 0.0;
  std::size_t replicates = 0;
  std::uint64_t count_left = 0;
  std::uint64_t count_right = 0;
  std::uint64_t count_two_sided = 0;
  double freq_left = 0.0;
  double freq_right = 0.0;
  double freq_two_sided = 0.0;
  double ci_left = 0.0;
  double ci_right = 0.0;
  double ci_two_sided = 0.0;
  std::vector<BoundReport> bound_rows;

  double frequency(Side side) const noexcept;
  double ci_halfwidth(Side side) const noexcept;
};

/// 3 sqrt(f(1-f)/R), or the rule-of-three 3/R when f = 0.
double ci_halfwidth(double frequency, std::size_t replicates) noexcept;

/// Per-replicate values of (1/n) sum_i Y_i.
std::vector<double> simulate_means(const ParamSet& params, const SimulationSettings& sim);

/// Tail frequencies for every epsilon with compare_bounds rows attached.
std::vector<TailEstimate> estimate_tail(const ExperimentConfig& config);

/// Bound rows that must dominate an estimate: applicable, valid, and the
/// empirical frequency on the row's side exceeds value + ci_halfwidth.
std::vector<BoundReport> dominance_violations(const TailEstimate& estimate);

/// Every member is (1/2, 1/(2(K-1)), ..., 1/(2(K-1))). Requires K >= 3.
ParamSet counterexample_params(std::size_t K, std::size_t n);

/// Published universal Berry-Esseen constant used by default.
inline constexpr double kBerryEsseenConstant = 0.4748;

struct CounterexampleReport {
  std::size_t K = 0;
  std::size_t n = 0;
  double epsilon = 0.0;
  double exact_tail = 0.0;  ///< two-sided
  double exact_left = 0.0;
  double exact_right = 0.0;
  double variance = 0.0;  ///< (log(K-1))^2 / (4n)
  double normal_floor = 0.0;
  double c_be = kBerryEsseenConstant;
};

/// Exact tails of (log(K-1)/(2n)) (2B - n), B ~ Binomial(n, 1/2), by direct
/// summation. Requires K >= 3 and n <= 1e6.
CounterexampleReport counterexample_exact_tail(std::size_t K, std::size_t n, double epsilon,
                                               double c_be = kBerryEsseenConstant);

/// Standard normal CDF.
double normal_cdf(double x) noexcept;

/// max(0, Phi(-2 sqrt(n) eps / log(K-1)) - c_be / sqrt(n)).
double berry_esseen_floor(std::size_t K, std::size_t n, double epsilon,
                          double c_be = kBerryEsseenConstant);

struct Group {
  std::vector<ProbVector> members;
};

/// Variables split into groups whose likelihood shares the pooled
/// per-group average of the true parameters.
class GroupedParamSet {
 public:
  explicit GroupedParamSet(std::vector<Group> groups);

  const std::vector<Group>& groups() const noexcept { return groups_; }
  std::size_t size() const noexcept { return total_; }
  std::size_t alphabet_size() const noexcept { return groups_.front().members.front().size(); }
  /// All members in group order.
  ParamSet flattened() const;

 private:
  std::vector<Group> groups_;
  std::size_t total_ = 0;
};

/// Per-group coordinate means, computed as running means so identical
/// members reproduce themselves bit for bit.
std::vector<ProbVector> pooled_params(const GroupedParamSet& g);

std::vector<double> simulate_misspecified_means(const GroupedParamSet& g,
                                                const SimulationSettings& sim);

/// Tails of the misspecified statistic; rows carry the uniform bounds.
std::vector<TailEstimate> misspecified_tail(const GroupedParamSet& g,
                                            const SimulationSettings& sim);

struct GroupedMgfRow {
  std::size_t group = 0;
  double lambda = 0.0;
  double exact = 0.0;          ///< E[exp(lambda U)]
  double pooled_power = 0.0;   ///< M_Y(lambda, pooled)^n_i
  double uniform_upper = 0.0;  ///< exp(n_i lambda^2 (log K)^2)
  bool admissible = false;     ///< lambda inside lambda_domain(K)
  bool amgm_holds = false;
  bool upper_holds = false;    ///< only meaningful when admissible
};

/// Exact E[exp(lambda U)] of one group from the factored closed form.
double grouped_mgf_exact(const Group& group, const ProbVector& pooled, double lambda);

/// Checks E[e^{lambda U}] <= M_Y(lambda, pooled)^n_i <= exp(n_i lambda^2 (log K)^2)
/// for every group and lambda. The tolerance is relative, 1e-12.
std::vector<GroupedMgfRow> grouped_mgf_check(const GroupedParamSet& g,
                                             const std::vector<double>& lambdas);

}  // namespace entconc
