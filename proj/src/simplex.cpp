// SPDX-License-Identifier: Apache-2.0
#include "entconc/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "entconc/error.hpp"

namespace entconc {

double to_base(double nats, LogBase base) noexcept {
  return base == LogBase::bits ? nats / std::numbers::ln2 : nats;
}

double to_nats(double value, LogBase base) noexcept {
  return base == LogBase::bits ? value * std::numbers::ln2 : value;
}

namespace {

void check_entries(const std::vector<double>& probs) {
  if (probs.size() < 2) {
    throw InvalidArgument("alphabet size must be at least 2, got " +
                          std::to_string(probs.size()));
  }
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double v = probs[k];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidArgument("probability " + std::to_string(k) + " = " +
                            std::to_string(v) + " is outside [0,1]");
    }
  }
}

ProbVector normalized(std::vector<double> w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= total;
  return ProbVector(std::move(w));
}

}  // namespace

ProbVector::ProbVector(std::vector<double> probs, bool on_simplex)
    : probs_(std::move(probs)), on_simplex_(on_simplex) {
  check_entries(probs_);
}

ProbVector::ProbVector(std::vector<double> probs)
    : ProbVector(std::move(probs), true) {
  const double total = std::accumulate(probs_.begin(), probs_.end(), 0.0);
  if (std::abs(total - 1.0) > kSimplexTolerance) {
    throw InvalidArgument("probabilities sum to " + std::to_string(total) +
                          ", not 1 within 1e-12");
  }
}

ProbVector ProbVector::relaxed(std::vector<double> probs) {
  return ProbVector(std::move(probs), false);
}

ProbVector ProbVector::uniform(std::size_t k) {
  if (k < 2) throw InvalidArgument("alphabet size must be at least 2");
  return ProbVector(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

bool ProbVector::interior() const noexcept {
  return std::all_of(probs_.begin(), probs_.end(), [](double v) { return v > 0.0; });
}

bool ProbVector::degenerate() const noexcept {
  return std::count_if(probs_.begin(), probs_.end(),
                       [](double v) { return v > 0.0; }) == 1;
}

ProbVector ProbVector::padded(std::size_t k) const {
  if (k <= probs_.size()) return *this;
  auto probs = probs_;
  probs.resize(k, 0.0);
  return ProbVector(std::move(probs), on_simplex_);
}

ParamSet::ParamSet(std::vector<ProbVector> members) : members_(std::move(members)) {
  if (members_.empty()) throw InvalidArgument("parameter set must be nonempty");
  const std::size_t k = members_.front().size();
  for (const auto& p : members_) {
    if (p.size() != k) throw InvalidArgument("parameter set mixes alphabet sizes");
    if (!p.on_simplex()) throw InvalidArgument("parameter set members must lie on the simplex");
  }
}

ParamSet ParamSet::repeated(const ProbVector& p, std::size_t n) {
  return ParamSet(std::vector<ProbVector>(n, p));
}

bool ParamSet::interior() const noexcept {
  return std::all_of(members_.begin(), members_.end(),
                     [](const ProbVector& p) { return p.interior(); });
}

bool ParamSet::all_degenerate() const noexcept {
  return std::all_of(members_.begin(), members_.end(),
                     [](const ProbVector& p) { return p.degenerate(); });
}

double negentropy(const ProbVector& p) {
  double s = 0.0;
  for (double v : p) {
    if (v > 0.0) s += v * std::log(v);
  }
  return s;
}

double entropy(const ProbVector& p, LogBase base) {
  return to_base(-negentropy(p), base);
}

double second_moment_loglik(const ProbVector& p) {
  double s = 0.0;
  for (double v : p) {
    if (v > 0.0) {
      const double l = std::log(v);
      s += v * l * l;
    }
  }
  return s;
}

double loglik_variance(const ProbVector& p) {
  const double m = negentropy(p);
  return std::max(0.0, second_moment_loglik(p) - m * m);
}

std::vector<double> centered_scores(const ProbVector& truth, const ProbVector& model) {
  const std::size_t k = truth.size();
  if (model.size() != k) throw InvalidArgument("alphabet sizes differ");
  std::vector<double> logs(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    if (model[j] > 0.0) {
      logs[j] = std::log(model[j]);
    } else if (truth[j] > 0.0) {
      throw InvalidArgument("model assigns zero probability to a reachable category");
    }
  }
  std::vector<double> scores(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    if (truth[c] == 0.0) continue;
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (truth[j] > 0.0) s += truth[j] * (logs[c] - logs[j]);
    }
    scores[c] = s;
  }
  return scores;
}

std::vector<double> centered_scores(const ProbVector& p) { return centered_scores(p, p); }

LogLikStats centered_loglik(OneHotSample z, const ProbVector& p) {
  if (z.category >= p.size()) throw InvalidArgument("category index out of range");
  if (p[z.category] == 0.0) {
    throw ImpossibleSample("category " + std::to_string(z.category) +
                           " has zero probability");
  }
  const auto scores = centered_scores(p);
  return {std::log(p[z.category]), negentropy(p), scores[z.category]};
}

double mean_centered_loglik(std::span<const OneHotSample> samples, const ParamSet& params) {
  if (samples.size() != params.size()) {
    throw InvalidArgument("sample count " + std::to_string(samples.size()) +
                          " differs from parameter count " + std::to_string(params.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    sum += centered_loglik(samples[i], params[i]).centered;
  }
  return sum / static_cast<double>(samples.size());
}

CategoricalSampler::CategoricalSampler(const ProbVector& p) : cdf_(p.size()) {
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    acc += p[k];
    cdf_[k] = acc;
    if (p[k] > 0.0) last_positive_ = k;
  }
}

std::size_t CategoricalSampler::pick(double u) const noexcept {
  // First k with u < cdf[k]; a zero-probability k repeats cdf[k-1] and is
  // skipped by construction. Rounding can leave cdf.back() slightly below 1.
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) return last_positive_;
  return static_cast<std::size_t>(it - cdf_.begin());
}

OneHotSample sample(const ProbVector& p, RandomStream& stream) {
  return {CategoricalSampler(p)(stream)};
}

ProbVector random_simplex(std::size_t k, RandomStream& stream) {
  if (k < 2) throw InvalidArgument("alphabet size must be at least 2");
  std::vector<double> w(k);
  for (double& v : w) v = -std::log(stream.uniform_open_low());
  return normalized(std::move(w));
}

ProbVector boundary_heavy_simplex(std::size_t k, RandomStream& stream) {
  if (k < 2) throw InvalidArgument("alphabet size must be at least 2");
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = k - 1; i > 0; --i) {
    std::swap(order[i], order[stream.next_u64() % (i + 1)]);
  }
  const std::size_t alive = 1 + stream.next_u64() % k;
  std::vector<double> w(k, 0.0);
  for (std::size_t i = 0; i < alive; ++i) {
    const double mode = stream.uniform();
    double v;
    if (mode < 0.35) {
      v = std::pow(10.0, -15.0 + 12.0 * stream.uniform());
    } else {
      const double e = -std::log(stream.uniform_open_low());
      v = e * e * e * e;
    }
    w[order[i]] = v;
  }
  // Guarantee one macroscopic entry so normalization stays well conditioned.
  w[order[0]] = std::max(w[order[0]], 1e-3);
  return normalized(std::move(w));
}

}  // namespace entconc
