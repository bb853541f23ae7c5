// SPDX-License-Identifier: Apache-2.0
#pragma once

// Exact MGF of the centered log-likelihood, the two simplex maximization
// results that bound it (second moment and F), numeric oracles that check
// them by brute force, and the convexity checks behind the F result.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "entconc/simplex.hpp"

namespace entconc {

struct MGFPoint {
  double lambda = 0.0;
  double value = 1.0;
};

/// E[exp(lambda Y)] = sum_k p_k^(lambda+1) exp(-lambda sum_j p_j log p_j),
/// evaluated as sum_k p_k exp(lambda Y_k) with 0^(lambda+1) = 0. Throws
/// DomainError for lambda <= -1.
MGFPoint mgf_exact(double lambda, const ProbVector& p);

/// F(lambda, p) = sum_k p_k^(lambda+1) - 1 - lambda sum_k p_k log p_k.
/// Throws DomainError for lambda <= -1.
double f_objective(double lambda, const ProbVector& p);

/// Closed-form max of F over the simplex: exp(-lambda log K) - 1 + lambda log K.
double f_closed_form(double lambda, std::size_t K);

/// Smallest lambda for which the F maximum is attained at the uniform point:
/// (2 - 2/K - log K) / ((1 - 1/K) log K).
double f_lemma_threshold(std::size_t K);

struct LambdaInterval {
  double lower = -1.0;  ///< inclusive, always > -1
  double upper = 0.0;   ///< +inf
};

/// Admissible tilts for the uniform MGF bound: lambda >= -1/b*(K).
/// K below 5 is padded to 5.
LambdaInterval lambda_domain(std::size_t K);

/// exp(lambda^2 (log K)^2). Throws DomainError below lambda_domain(K).lower.
double mgf_upper(double lambda, std::size_t K);

enum class Objective { variance, f_at_lambda };

std::string_view to_string(Objective objective) noexcept;

struct OracleConfig {
  std::size_t starts = 50;
  double gradient_tolerance = 1e-10;
  std::size_t max_iterations = 20000;
  /// Grid size per level count in the two-level sweep before refinement.
  std::size_t sweep_points = 2000;
  std::size_t max_alphabet = 64;
  std::uint64_t seed = 0x5eedull;
  std::size_t workers = 1;
};

struct OptimizationTrace {
  Objective objective = Objective::variance;
  std::optional<double> lambda;
  /// Lagrange multiplier that makes 1/K stationary in the decoupled problem.
  double multiplier = 0.0;
  /// Roots of the first-order condition of the per-coordinate problem.
  std::vector<double> stationary_points;
  /// Per-coordinate second derivative at each stationary point.
  std::vector<double> second_derivatives;
  /// For the F problem: the unique zero of f''(p) on (0, inf).
  std::optional<double> sign_change_point;
  /// Best point found by the oracle (coordinates in [0,1]).
  std::vector<double> maximizer;
  /// Closed-form maximum (log K)^2 or F(lambda) at the uniform point.
  double max_value = 0.0;
  /// Maximum found by brute force.
  double oracle_value = 0.0;
  double gap = 0.0;
  /// False when no closed form is claimed (K < 5).
  bool closed_form_applies = true;
  /// Index of the winning multistart (or the sweep, reported as `starts`).
  std::size_t winning_start = 0;
};

/// Brute-force max of sum_k p_k (log p_k)^2 over the simplex for
/// 2 <= K <= config.max_alphabet: multistart projected gradient ascent plus an
/// exhaustive sweep of two-level candidates.
OptimizationTrace variance_max_oracle(std::size_t K, const OracleConfig& config = {});

/// Brute-force max of F(lambda, .) over the simplex. Requires K >= 5 and
/// lambda >= f_lemma_threshold(K) (DomainError otherwise).
OptimizationTrace f_max_oracle(double lambda, std::size_t K, const OracleConfig& config = {});

/// The analytic Lagrangian data: multiplier, stationary points and curvature.
/// `lambda` is required for the F objective.
OptimizationTrace lagrangian_stationary(std::size_t K, Objective objective,
                                        std::optional<double> lambda = std::nullopt);

/// g(lambda) = f(1/K) - f(1) = (lambda - lambda/K + 1) exp(-lambda log K)
///             + lambda (1/K + log K - 1) - 1.
double appendix_g(double lambda, std::size_t K);

struct GridSpec {
  std::size_t points = 10000;
  double upper = 10.0;
};

struct AppendixReport {
  std::size_t K = 0;
  double threshold = 0.0;
  double min_g = 0.0;
  double argmin_g = 0.0;
  double g_at_zero = 0.0;
  double dg_at_zero = 0.0;      ///< central finite difference
  double d2g_at_threshold = 0.0;
  double d2g_below = 0.0;       ///< one grid step below the threshold
  double d2g_above = 0.0;       ///< one grid step above the threshold
  bool nonnegative = false;     ///< g >= -1e-12 on the grid
  bool zero_at_origin = false;  ///< g(0) == 0 and |g'(0)| <= 1e-9
  bool sign_flip = false;       ///< g'' < 0 below and > 0 above the threshold
  bool passed() const noexcept { return nonnegative && zero_at_origin && sign_flip; }
};

/// Checks g >= 0 on [threshold, grid.upper], g(0) = 0, g'(0) = 0 and the
/// curvature sign change at the threshold. Requires K >= 5.
AppendixReport appendix_g_check(std::size_t K, const GridSpec& grid = {});

/// argmax and max of p (log p)^2 on [0, 1]: (e^-2, 4 e^-2).
std::pair<double, double> plogsq_scalar_max() noexcept;

}  // namespace entconc
