// SPDX-License-Identifier: Apache-2.0
#pragma once

// Closed-form tail bounds for the mean centered log-likelihood
//   (1/n) sum_i (sum_k z_ik log p_ik - sum_k p_ik log p_ik)
// together with the baselines they improve on. Uniform bounds evaluate with
// the alphabet padded to max(K, 5): empty categories do not change the
// statistic. Values above 1 are returned unclamped so comparisons show which
// bounds are vacuous. Exponents are formed first and exponentiated last.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "entconc/simplex.hpp"

namespace entconc {

enum class Side { left, right, two_sided };
enum class Regime { quadratic, linear, not_applicable };

enum class BoundFamily {
  main,
  right_uniform,
  left_uniform,
  fixed_right,
  fixed_left,
  chebyshev_params,
  chebyshev_uniform,
  chebyshev_rough,
  zhao2020,
  bernstein_k2,
  bits,
};

std::string_view to_string(Side side) noexcept;
std::string_view to_string(Regime regime) noexcept;
std::string_view to_string(BoundFamily family) noexcept;

struct TailQuery {
  std::size_t n = 1;
  std::size_t K = 2;
  double epsilon = 0.0;  ///< in units of `base`
  Side side = Side::two_sided;
  LogBase base = LogBase::natural;

  /// Throws InvalidArgument unless n >= 1, K >= 2, epsilon > 0.
  void validate() const;
  double epsilon_nats() const noexcept { return to_nats(epsilon, base); }
};

struct BoundReport {
  BoundFamily family = BoundFamily::main;
  Side side = Side::two_sided;
  double value = 0.0;
  Regime regime = Regime::quadratic;
  /// The query meets the bound's stated preconditions.
  bool valid = true;
  /// False for rows of compare_bounds whose inputs are missing or unsuitable.
  bool applicable = true;
  /// Alphabet size the formula was evaluated at (after padding).
  std::size_t effective_K = 0;
  std::optional<double> b_fixed;
  std::optional<double> b_star;
  std::string note;
};

/// Uniform left-tail scale 1 / min{1/log K, (log K + 2/K - 2)/((1 - 1/K) log K)}.
/// K below 5 is padded to 5.
double bstar(std::size_t K);

/// Crossover 2 (log K)^2 / b* between the quadratic and linear left-tail
/// regimes (nats; K padded to 5).
double left_tail_crossover(std::size_t K);

/// 2 exp(-n eps^2 / (4 max{log K, log 5}^2)). Flagged valid only in the
/// quadratic regime of the left tail.
BoundReport main_bound(const TailQuery& q);

/// exp(-n eps^2 / (4 (log K)^2)); valid for all eps > 0.
BoundReport right_tail_uniform(const TailQuery& q);

/// Quadratic bound up to the crossover, exp(-n eps / (2 b*)) beyond it.
BoundReport left_tail_uniform(const TailQuery& q);

/// exp(-n^2 eps^2 / (4 sum_i sum_k p_ik (log p_ik)^2)); `epsilon` in nats.
BoundReport fixed_right_tail(const ParamSet& params, double epsilon);

/// Sub-exponential bound with b = max |log p_ik|. Throws BoundaryParameter
/// when some p_ik = 0.
BoundReport fixed_left_tail(const ParamSet& params, double epsilon);

/// Chebyshev family: the parameter-specific variance form when `params` is
/// given, then the uniform (log K)^2/(n eps^2) and the rough 4K/(n eps^2 e^2).
std::vector<BoundReport> chebyshev_bounds(const TailQuery& q,
                                          const ParamSet* params = nullptr);

/// 2K exp(-n eps^2 / (2K(K + eps))).
BoundReport zhao2020_bound(const TailQuery& q);

/// Bernstein's inequality for K = 2 with M = max |logit p_i1|. Throws
/// BoundaryParameter when some p_i1 is 0 or 1.
BoundReport bernstein_k2_bound(const ParamSet& params, double epsilon);

/// Bit-unit restatement exp(-n eps^2 / (4 (log2 K)^2)) evaluated directly in
/// bits. Two-sided queries return twice the one-sided value. The left tail is
/// valid only in the quadratic regime.
BoundReport bit_bounds(const TailQuery& q);

/// One row per bound family. Rows that need parameters (or interior, or
/// K = 2 parameters) are marked not applicable with a reason when the
/// requirement is not met. When `params` is given it must match q.n and q.K.
std::vector<BoundReport> compare_bounds(const TailQuery& q,
                                        const ParamSet* params = nullptr);

}  // namespace entconc
