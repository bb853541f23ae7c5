// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "entconc/rng.hpp"

namespace entconc {

/// Absolute tolerance on sum(p) for members of the simplex.
inline constexpr double kSimplexTolerance = 1e-12;

enum class LogBase { natural, bits };

/// Converts a value in nats to the requested base.
double to_base(double nats, LogBase base) noexcept;

/// Converts a value expressed in `base` to nats.
double to_nats(double value, LogBase base) noexcept;

/// K category probabilities. Either a point of the simplex C (entries in
/// [0,1] summing to 1 within kSimplexTolerance) or, when built with
/// `relaxed`, a point of the box D = [0,1]^K without the sum constraint.
/// Inputs outside tolerance are rejected, never renormalized.
class ProbVector {
 public:
  explicit ProbVector(std::vector<double> probs);

  static ProbVector relaxed(std::vector<double> probs);
  static ProbVector uniform(std::size_t k);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t k) const { return probs_[k]; }
  std::span<const double> probs() const noexcept { return probs_; }
  auto begin() const noexcept { return probs_.begin(); }
  auto end() const noexcept { return probs_.end(); }

  bool on_simplex() const noexcept { return on_simplex_; }
  /// Every entry strictly positive.
  bool interior() const noexcept;
  /// Exactly one nonzero entry.
  bool degenerate() const noexcept;

  /// Appends zero-probability categories until the alphabet has `k` symbols.
  ProbVector padded(std::size_t k) const;

  friend bool operator==(const ProbVector&, const ProbVector&) = default;

 private:
  ProbVector(std::vector<double> probs, bool on_simplex);

  std::vector<double> probs_;
  bool on_simplex_ = true;
};

/// A one-hot draw; `category` is zero-based.
struct OneHotSample {
  std::size_t category = 0;
  friend bool operator==(const OneHotSample&, const OneHotSample&) = default;
};

/// Heterogeneous parameter sequence p_1..p_n sharing one alphabet size.
class ParamSet {
 public:
  explicit ParamSet(std::vector<ProbVector> members);
  /// n copies of the same distribution.
  static ParamSet repeated(const ProbVector& p, std::size_t n);

  std::size_t size() const noexcept { return members_.size(); }
  std::size_t alphabet_size() const noexcept { return members_.front().size(); }
  const ProbVector& operator[](std::size_t i) const { return members_[i]; }
  auto begin() const noexcept { return members_.begin(); }
  auto end() const noexcept { return members_.end(); }
  const std::vector<ProbVector>& members() const noexcept { return members_; }

  bool interior() const noexcept;
  bool all_degenerate() const noexcept;

 private:
  std::vector<ProbVector> members_;
};

struct LogLikStats {
  double loglik = 0.0;
  double negentropy = 0.0;
  double centered = 0.0;
};

/// -sum p log p in the selected base, with 0 log 0 = 0.
double entropy(const ProbVector& p, LogBase base = LogBase::natural);

/// sum p log p (nats).
double negentropy(const ProbVector& p);

/// sum p (log p)^2, the second moment of the log-likelihood (nats^2).
double second_moment_loglik(const ProbVector& p);

/// Var L(z) = sum p (log p)^2 - (sum p log p)^2.
double loglik_variance(const ProbVector& p);

/// Centered log-likelihood Y(k) = log p_k - sum_j p_j log p_j for every
/// category, computed as sum_j p_j (log p_k - log p_j). The difference form is
/// exactly zero at the uniform point. Zero-probability categories get 0 since
/// they can never be drawn.
std::vector<double> centered_scores(const ProbVector& p);

/// Scores of a misspecified likelihood: category k of a variable drawn from
/// `truth` is scored against `model` as sum_j truth_j (log model_k - log model_j).
/// Requires model_k > 0 wherever truth_k > 0.
std::vector<double> centered_scores(const ProbVector& truth, const ProbVector& model);

/// Throws ImpossibleSample if the drawn category has zero probability.
LogLikStats centered_loglik(OneHotSample z, const ProbVector& p);

/// (1/n) sum_i Y_i. Throws InvalidArgument on a length mismatch.
double mean_centered_loglik(std::span<const OneHotSample> samples,
                            const ParamSet& params);

/// Inverse-CDF categorical sampler. Uses one uniform per draw and never
/// returns a zero-probability category.
class CategoricalSampler {
 public:
  explicit CategoricalSampler(const ProbVector& p);

  std::size_t operator()(RandomStream& stream) const noexcept {
    return pick(stream.uniform());
  }
  std::size_t pick(double u) const noexcept;

 private:
  std::vector<double> cdf_;
  std::size_t last_positive_ = 0;
};

OneHotSample sample(const ProbVector& p, RandomStream& stream);

/// Uniform draw from the simplex (normalized independent exponentials).
ProbVector random_simplex(std::size_t k, RandomStream& stream);

/// Adversarial draw that pushes mass onto the boundary: random zero entries,
/// tiny entries down to 1e-15 and a heavily skewed remainder.
ProbVector boundary_heavy_simplex(std::size_t k, RandomStream& stream);

}  // namespace entconc
