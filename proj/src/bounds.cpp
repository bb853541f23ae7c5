// SPDX-License-Identifier: Apache-2.0
#include "entconc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "entconc/error.hpp"

namespace entconc {

namespace {

constexpr std::size_t kMinUniformK = 5;

std::size_t padded_k(std::size_t k) { return std::max(k, kMinUniformK); }

double sum_second_moments(const ParamSet& params) {
  double s = 0.0;
  for (const auto& p : params) s += second_moment_loglik(p);
  return s;
}

BoundReport not_applicable(BoundFamily family, Side side, std::size_t k,
                           std::string reason) {
  BoundReport r;
  r.family = family;
  r.side = side;
  r.value = std::numeric_limits<double>::quiet_NaN();
  r.regime = Regime::not_applicable;
  r.valid = false;
  r.applicable = false;
  r.effective_K = k;
  r.note = std::move(reason);
  return r;
}

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
}

}  // namespace

std::string_view to_string(Side side) noexcept {
  switch (side) {
    case Side::left: return "left";
    case Side::right: return "right";
    case Side::two_sided: return "two-sided";
  }
  return "?";
}

std::string_view to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::quadratic: return "quadratic";
    case Regime::linear: return "linear";
    case Regime::not_applicable: return "not-applicable";
  }
  return "?";
}

std::string_view to_string(BoundFamily family) noexcept {
  switch (family) {
    case BoundFamily::main: return "main";
    case BoundFamily::right_uniform: return "right-uniform";
    case BoundFamily::left_uniform: return "left-uniform";
    case BoundFamily::fixed_right: return "fixed-right";
    case BoundFamily::fixed_left: return "fixed-left";
    case BoundFamily::chebyshev_params: return "chebyshev-params";
    case BoundFamily::chebyshev_uniform: return "chebyshev-uniform";
    case BoundFamily::chebyshev_rough: return "chebyshev-rough";
    case BoundFamily::zhao2020: return "zhao2020";
    case BoundFamily::bernstein_k2: return "bernstein-k2";
    case BoundFamily::bits: return "bits";
  }
  return "?";
}

void TailQuery::validate() const {
  if (n < 1) throw InvalidArgument("n must be at least 1");
  if (K < 2) throw InvalidArgument("K must be at least 2");
  check_epsilon(epsilon);
  if (!std::isfinite(epsilon)) throw InvalidArgument("epsilon must be finite");
}

double bstar(std::size_t K) {
  const auto k = static_cast<double>(padded_k(K));
  const double lk = std::log(k);
  const double branch_log = 1.0 / lk;
  const double branch_curv = (lk + 2.0 / k - 2.0) / ((1.0 - 1.0 / k) * lk);
  return 1.0 / std::min(branch_log, branch_curv);
}

double left_tail_crossover(std::size_t K) {
  const double lk = std::log(static_cast<double>(padded_k(K)));
  return 2.0 * lk * lk / bstar(K);
}

BoundReport main_bound(const TailQuery& q) {
  q.validate();
  const std::size_t k = padded_k(q.K);
  const double lk = std::log(static_cast<double>(k));
  const double eps = q.epsilon_nats();
  const double n = static_cast<double>(q.n);
  BoundReport r;
  r.family = BoundFamily::main;
  r.side = Side::two_sided;
  r.effective_K = k;
  r.value = 2.0 * std::exp(-n * eps * eps / (4.0 * lk * lk));
  r.b_star = bstar(k);
  r.regime = eps <= left_tail_crossover(k) ? Regime::quadratic : Regime::linear;
  r.valid = r.regime == Regime::quadratic;
  if (!r.valid) r.note = "epsilon beyond the quadratic regime of the left tail";
  return r;
}

BoundReport right_tail_uniform(const TailQuery& q) {
  q.validate();
  const std::size_t k = padded_k(q.K);
  const double lk = std::log(static_cast<double>(k));
  const double eps = q.epsilon_nats();
  BoundReport r;
  r.family = BoundFamily::right_uniform;
  r.side = Side::right;
  r.effective_K = k;
  r.value = std::exp(-static_cast<double>(q.n) * eps * eps / (4.0 * lk * lk));
  r.regime = Regime::quadratic;
  return r;
}

BoundReport left_tail_uniform(const TailQuery& q) {
  q.validate();
  const std::size_t k = padded_k(q.K);
  const double lk = std::log(static_cast<double>(k));
  const double eps = q.epsilon_nats();
  const double n = static_cast<double>(q.n);
  const double bs = bstar(k);
  BoundReport r;
  r.family = BoundFamily::left_uniform;
  r.side = Side::left;
  r.effective_K = k;
  r.b_star = bs;
  if (eps <= 2.0 * lk * lk / bs) {
    r.regime = Regime::quadratic;
    r.value = std::exp(-n * eps * eps / (4.0 * lk * lk));
  } else {
    r.regime = Regime::linear;
    r.value = std::exp(-n * eps / (2.0 * bs));
  }
  return r;
}

BoundReport fixed_right_tail(const ParamSet& params, double epsilon) {
  check_epsilon(epsilon);
  const double n = static_cast<double>(params.size());
  const double s = sum_second_moments(params);
  BoundReport r;
  r.family = BoundFamily::fixed_right;
  r.side = Side::right;
  r.effective_K = params.alphabet_size();
  r.regime = Regime::quadratic;
  if (s == 0.0) {
    r.value = 0.0;
    r.note = "all members degenerate: the statistic is identically 0";
    return r;
  }
  r.value = std::exp(-n * n * epsilon * epsilon / (4.0 * s));
  return r;
}

BoundReport fixed_left_tail(const ParamSet& params, double epsilon) {
  check_epsilon(epsilon);
  if (!params.interior()) {
    throw BoundaryParameter("fixed left-tail bound needs every p_ik > 0");
  }
  double min_p = 1.0;
  for (const auto& p : params) {
    for (double v : p) min_p = std::min(min_p, v);
  }
  const double b = -std::log(min_p);
  const double n = static_cast<double>(params.size());
  const double s = sum_second_moments(params);
  BoundReport r;
  r.family = BoundFamily::fixed_left;
  r.side = Side::left;
  r.effective_K = params.alphabet_size();
  r.b_fixed = b;
  if (epsilon <= 2.0 * s / (n * b)) {
    r.regime = Regime::quadratic;
    r.value = std::exp(-n * n * epsilon * epsilon / (4.0 * s));
  } else {
    r.regime = Regime::linear;
    r.value = std::exp(-n * epsilon / (2.0 * b));
  }
  return r;
}

std::vector<BoundReport> chebyshev_bounds(const TailQuery& q, const ParamSet* params) {
  q.validate();
  const double eps = q.epsilon_nats();
  const double n = static_cast<double>(q.n);
  std::vector<BoundReport> rows;
  auto make = [&](BoundFamily family, double value, std::size_t k) {
    BoundReport r;
    r.family = family;
    r.side = Side::two_sided;
    r.value = value;
    r.regime = Regime::quadratic;
    r.effective_K = k;
    rows.push_back(std::move(r));
  };
  if (params != nullptr) {
    double var = 0.0;
    for (const auto& p : *params) var += loglik_variance(p);
    const double np = static_cast<double>(params->size());
    make(BoundFamily::chebyshev_params, var / (np * np * eps * eps), params->alphabet_size());
  }
  const std::size_t k = padded_k(q.K);
  const double lk = std::log(static_cast<double>(k));
  make(BoundFamily::chebyshev_uniform, lk * lk / (n * eps * eps), k);
  const double kk = static_cast<double>(q.K);
  make(BoundFamily::chebyshev_rough,
       4.0 * kk / (n * eps * eps * std::numbers::e * std::numbers::e), q.K);
  return rows;
}

BoundReport zhao2020_bound(const TailQuery& q) {
  q.validate();
  const double k = static_cast<double>(q.K);
  const double eps = q.epsilon_nats();
  const double n = static_cast<double>(q.n);
  BoundReport r;
  r.family = BoundFamily::zhao2020;
  r.side = Side::two_sided;
  r.effective_K = q.K;
  r.regime = Regime::quadratic;
  r.value = std::exp(std::log(2.0 * k) - n * eps * eps / (2.0 * k * (k + eps)));
  return r;
}

BoundReport bernstein_k2_bound(const ParamSet& params, double epsilon) {
  check_epsilon(epsilon);
  if (params.alphabet_size() != 2) {
    throw InvalidArgument("Bernstein baseline is defined for K = 2 only");
  }
  double m = 0.0;
  double var = 0.0;
  for (const auto& p : params) {
    const double p1 = p[0];
    if (!(p1 > 0.0 && p1 < 1.0)) {
      throw BoundaryParameter("Bernstein baseline needs every p_i1 in (0,1)");
    }
    const double logit = std::log(p1) - std::log1p(-p1);
    m = std::max(m, std::abs(logit));
    var += p1 * (1.0 - p1) * logit * logit;
  }
  const double n = static_cast<double>(params.size());
  BoundReport r;
  r.family = BoundFamily::bernstein_k2;
  r.side = Side::two_sided;
  r.effective_K = 2;
  r.b_fixed = m;
  r.regime = Regime::quadratic;
  const double denom = var + m * n * epsilon / 3.0;
  if (denom == 0.0) {
    r.value = 0.0;
    r.note = "all p_i1 = 1/2: the statistic is identically 0";
    return r;
  }
  r.value = std::exp(std::numbers::ln2 - (n * n * epsilon * epsilon / 2.0) / denom);
  return r;
}

BoundReport bit_bounds(const TailQuery& q) {
  q.validate();
  const std::size_t k = padded_k(q.K);
  const double l2k = std::log2(static_cast<double>(k));
  const double eps_bits = q.base == LogBase::bits ? q.epsilon : q.epsilon / std::numbers::ln2;
  const double one_sided =
      std::exp(-static_cast<double>(q.n) * eps_bits * eps_bits / (4.0 * l2k * l2k));
  BoundReport r;
  r.family = BoundFamily::bits;
  r.side = q.side;
  r.effective_K = k;
  r.regime = Regime::quadratic;
  r.value = q.side == Side::two_sided ? 2.0 * one_sided : one_sided;
  if (q.side != Side::right) {
    r.b_star = bstar(k);
    r.valid = q.epsilon_nats() <= left_tail_crossover(k);
    if (!r.valid) r.note = "left tail outside the quadratic regime";
  }
  return r;
}

std::vector<BoundReport> compare_bounds(const TailQuery& q, const ParamSet* params) {
  q.validate();
  if (params != nullptr &&
      (params->size() != q.n || params->alphabet_size() != q.K)) {
    throw InvalidArgument("parameter set does not match the query's n and K");
  }
  const double eps = q.epsilon_nats();
  std::vector<BoundReport> rows;
  rows.push_back(main_bound(q));
  rows.push_back(right_tail_uniform(q));
  rows.push_back(left_tail_uniform(q));
  for (auto& r : chebyshev_bounds(q, params)) rows.push_back(std::move(r));
  rows.push_back(zhao2020_bound(q));

  if (params == nullptr) {
    rows.push_back(not_applicable(BoundFamily::fixed_right, Side::right, q.K,
                                  "requires parameters"));
    rows.push_back(not_applicable(BoundFamily::fixed_left, Side::left, q.K,
                                  "requires parameters"));
  } else {
    rows.push_back(fixed_right_tail(*params, eps));
    if (params->interior()) {
      rows.push_back(fixed_left_tail(*params, eps));
    } else {
      rows.push_back(not_applicable(BoundFamily::fixed_left, Side::left, q.K,
                                    "boundary parameters: max |log p| is infinite"));
    }
  }

  bool bernstein_ok = params != nullptr && q.K == 2;
  if (bernstein_ok) {
    bernstein_ok = std::all_of(params->begin(), params->end(), [](const ProbVector& p) {
      return p[0] > 0.0 && p[0] < 1.0;
    });
  }
  if (bernstein_ok) {
    rows.push_back(bernstein_k2_bound(*params, eps));
  } else {
    rows.push_back(not_applicable(
        BoundFamily::bernstein_k2, Side::two_sided, q.K,
        q.K != 2 ? "requires K = 2" : "requires interior K = 2 parameters"));
  }

  if (q.base == LogBase::bits) {
    for (Side side : {Side::right, Side::left}) {
      TailQuery one = q;
      one.side = side;
      rows.push_back(bit_bounds(one));
    }
  }
  return rows;
}

}  // namespace entconc
