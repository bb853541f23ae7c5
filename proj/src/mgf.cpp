// SPDX-License-Identifier: Apache-2.0
#include "entconc/mgf.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <thread>

#include "entconc/bounds.hpp"
#include "entconc/error.hpp"
#include "entconc/rng.hpp"

namespace entconc {

namespace {

void check_lambda(double lambda) {
  if (!(lambda > -1.0)) {
    throw DomainError("lambda must exceed -1, got " + std::to_string(lambda));
  }
}

double log_k(std::size_t k) { return std::log(static_cast<double>(k)); }

// Objective of the form sum_k phi(p_k) + offset with its coordinate derivative.
struct Separable {
  std::function<double(double)> phi;
  std::function<double(double)> dphi;
  double offset = 0.0;

  double total(std::span<const double> p) const {
    double s = offset;
    for (double v : p) s += phi(v);
    return s;
  }
};

// Euclidean projection onto the probability simplex.
void project_to_simplex(std::vector<double>& v) {
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumulative += sorted[j];
    const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - t > 0.0) theta = t;
  }
  for (double& x : v) x = std::max(0.0, x - theta);
}

struct Candidate {
  std::vector<double> point;
  double value = -std::numeric_limits<double>::infinity();
};

Candidate projected_ascent(const Separable& obj, std::vector<double> x,
                           const OracleConfig& config) {
  constexpr double kFloor = 1e-300;
  const std::size_t k = x.size();
  double f = obj.total(x);
  double step = 1.0;
  std::vector<double> g(k);
  std::vector<double> y(k);
  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    for (std::size_t i = 0; i < k; ++i) g[i] = obj.dphi(std::max(x[i], kFloor));
    bool accepted = false;
    double fy = f;
    while (step > 1e-18) {
      for (std::size_t i = 0; i < k; ++i) y[i] = x[i] + step * g[i];
      project_to_simplex(y);
      fy = obj.total(y);
      double ascent = 0.0;
      for (std::size_t i = 0; i < k; ++i) ascent += g[i] * (y[i] - x[i]);
      if (fy >= f + 1e-4 * ascent && fy >= f) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    double move = 0.0;
    for (std::size_t i = 0; i < k; ++i) move = std::max(move, std::abs(y[i] - x[i]));
    x.swap(y);
    f = fy;
    if (move / step < config.gradient_tolerance) break;
    step = std::min(step * 2.0, 1e6);
  }
  return {std::move(x), f};
}

// Maximizes over points with m coordinates at a and K - m at (1 - m a)/(K - m).
Candidate two_level_sweep(const Separable& obj, std::size_t k, const OracleConfig& config) {
  Candidate best;
  const auto kk = static_cast<double>(k);
  for (std::size_t m = 1; m < k; ++m) {
    const auto mm = static_cast<double>(m);
    auto value = [&](double a) {
      const double b = std::max(0.0, (1.0 - mm * a) / (kk - mm));
      return obj.offset + mm * obj.phi(a) + (kk - mm) * obj.phi(b);
    };
    const double hi = 1.0 / mm;
    const std::size_t pts = std::max<std::size_t>(config.sweep_points, 8);
    std::size_t best_i = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i <= pts; ++i) {
      const double v = value(hi * static_cast<double>(i) / static_cast<double>(pts));
      if (v > best_v) {
        best_v = v;
        best_i = i;
      }
    }
    double lo_a = hi * static_cast<double>(best_i == 0 ? 0 : best_i - 1) / static_cast<double>(pts);
    double hi_a = hi * static_cast<double>(std::min(best_i + 1, pts)) / static_cast<double>(pts);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi_a - inv_phi * (hi_a - lo_a);
    double d = lo_a + inv_phi * (hi_a - lo_a);
    double fc = value(c);
    double fd = value(d);
    while (hi_a - lo_a > 1e-14) {
      if (fc > fd) {
        hi_a = d;
        d = c;
        fd = fc;
        c = hi_a - inv_phi * (hi_a - lo_a);
        fc = value(c);
      } else {
        lo_a = c;
        c = d;
        fc = fd;
        d = lo_a + inv_phi * (hi_a - lo_a);
        fd = value(d);
      }
    }
    double a = 0.5 * (lo_a + hi_a);
    double v = value(a);
    const double grid_a = hi * static_cast<double>(best_i) / static_cast<double>(pts);
    if (best_v > v) {
      a = grid_a;
      v = best_v;
    }
    if (v > best.value) {
      const double b = std::max(0.0, (1.0 - mm * a) / (kk - mm));
      best.point.assign(k, b);
      std::fill(best.point.begin(), best.point.begin() + static_cast<std::ptrdiff_t>(m), a);
      best.value = v;
    }
  }
  return best;
}

OptimizationTrace run_oracle(const Separable& obj, std::size_t k, const OracleConfig& config) {
  std::vector<Candidate> results(config.starts);
  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      RandomStream stream(config.seed, StreamPurpose::optimizer, s);
      auto start = random_simplex(k, stream);
      results[s] = projected_ascent(obj, {start.begin(), start.end()}, config);
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(config.workers, 1, std::max<std::size_t>(config.starts, 1));
  if (workers == 1) {
    run_range(0, config.starts);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (config.starts + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t b = std::min(config.starts, w * chunk);
      const std::size_t e = std::min(config.starts, b + chunk);
      pool.emplace_back(run_range, b, e);
    }
    for (auto& t : pool) t.join();
  }

  OptimizationTrace trace;
  Candidate best;
  for (std::size_t s = 0; s < results.size(); ++s) {
    if (results[s].value > best.value) {
      best = results[s];
      trace.winning_start = s;
    }
  }
  auto sweep = two_level_sweep(obj, k, config);
  if (sweep.value > best.value) {
    best = std::move(sweep);
    trace.winning_start = config.starts;
  }
  trace.maximizer = std::move(best.point);
  trace.oracle_value = best.value;
  return trace;
}

Separable variance_objective() {
  return {[](double p) {
            if (p <= 0.0) return 0.0;
            const double l = std::log(p);
            return p * l * l;
          },
          [](double p) {
            const double l = std::log(p);
            return l * l + 2.0 * l;
          },
          0.0};
}

Separable f_objective_separable(double lambda) {
  return {[lambda](double p) {
            if (p <= 0.0) return 0.0;
            return std::exp((lambda + 1.0) * std::log(p)) - lambda * p * std::log(p);
          },
          [lambda](double p) {
            return (lambda + 1.0) * std::exp(lambda * std::log(p)) - lambda * (std::log(p) + 1.0);
          },
          -1.0};
}

}  // namespace

MGFPoint mgf_exact(double lambda, const ProbVector& p) {
  check_lambda(lambda);
  if (lambda == 0.0) return {0.0, 1.0};
  const auto scores = centered_scores(p);
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0) s += p[k] * std::exp(lambda * scores[k]);
  }
  return {lambda, s};
}

double f_objective(double lambda, const ProbVector& p) {
  check_lambda(lambda);
  double power_sum = 0.0;
  for (double v : p) {
    if (v > 0.0) power_sum += std::exp((lambda + 1.0) * std::log(v));
  }
  return power_sum - 1.0 - lambda * negentropy(p);
}

double f_closed_form(double lambda, std::size_t K) {
  const double lk = log_k(K);
  return std::expm1(-lambda * lk) + lambda * lk;
}

double f_lemma_threshold(std::size_t K) {
  const auto k = static_cast<double>(K);
  const double lk = std::log(k);
  return (2.0 - 2.0 / k - lk) / ((1.0 - 1.0 / k) * lk);
}

LambdaInterval lambda_domain(std::size_t K) {
  return {-1.0 / bstar(K), std::numeric_limits<double>::infinity()};
}

double mgf_upper(double lambda, std::size_t K) {
  const auto domain = lambda_domain(K);
  if (lambda < domain.lower) {
    throw DomainError("lambda " + std::to_string(lambda) +
                      " is below the admissible limit " + std::to_string(domain.lower));
  }
  const double lk = log_k(std::max<std::size_t>(K, 5));
  return std::exp(lambda * lambda * lk * lk);
}

std::string_view to_string(Objective objective) noexcept {
  switch (objective) {
    case Objective::variance: return "variance";
    case Objective::f_at_lambda: return "F-at-lambda";
  }
  return "?";
}

OptimizationTrace variance_max_oracle(std::size_t K, const OracleConfig& config) {
  if (K < 2 || K > config.max_alphabet) {
    throw InvalidArgument("variance oracle supports 2 <= K <= " +
                          std::to_string(config.max_alphabet));
  }
  auto trace = run_oracle(variance_objective(), K, config);
  const auto analytic = lagrangian_stationary(K, Objective::variance);
  trace.objective = Objective::variance;
  trace.multiplier = analytic.multiplier;
  trace.stationary_points = analytic.stationary_points;
  trace.second_derivatives = analytic.second_derivatives;
  const double lk = log_k(K);
  trace.max_value = lk * lk;
  trace.gap = std::abs(trace.max_value - trace.oracle_value);
  trace.closed_form_applies = K >= 5;
  return trace;
}

OptimizationTrace f_max_oracle(double lambda, std::size_t K, const OracleConfig& config) {
  check_lambda(lambda);
  if (K < 5 || K > config.max_alphabet) {
    throw DomainError("F oracle supports 5 <= K <= " + std::to_string(config.max_alphabet));
  }
  if (lambda < f_lemma_threshold(K)) {
    throw DomainError("lambda " + std::to_string(lambda) + " is below the threshold " +
                      std::to_string(f_lemma_threshold(K)));
  }
  auto trace = run_oracle(f_objective_separable(lambda), K, config);
  const auto analytic = lagrangian_stationary(K, Objective::f_at_lambda, lambda);
  trace.objective = Objective::f_at_lambda;
  trace.lambda = lambda;
  trace.multiplier = analytic.multiplier;
  trace.stationary_points = analytic.stationary_points;
  trace.second_derivatives = analytic.second_derivatives;
  trace.sign_change_point = analytic.sign_change_point;
  trace.max_value = f_closed_form(lambda, K);
  trace.gap = std::abs(trace.max_value - trace.oracle_value);
  return trace;
}

OptimizationTrace lagrangian_stationary(std::size_t K, Objective objective,
                                        std::optional<double> lambda) {
  if (K < 2) throw InvalidArgument("K must be at least 2");
  const auto k = static_cast<double>(K);
  const double lk = std::log(k);
  OptimizationTrace trace;
  trace.objective = objective;
  trace.closed_form_applies = K >= 5;
  if (objective == Objective::variance) {
    // h(p) = p (log p)^2 + nu p;  h'(p) = (log p)^2 + 2 log p + nu;
    // h''(p) = (2 log p + 2) / p. Roots of y^2 + 2y + nu with y = log p.
    trace.multiplier = -lk * lk + 2.0 * lk;
    for (double p : {1.0 / k, std::exp(lk - 2.0)}) {
      trace.stationary_points.push_back(p);
      trace.second_derivatives.push_back((2.0 * std::log(p) + 2.0) / p);
    }
    return trace;
  }

  if (!lambda) throw InvalidArgument("F objective needs lambda");
  const double lam = *lambda;
  check_lambda(lam);
  trace.lambda = lam;
  const double nu = -(lam + 1.0) * std::exp(-lam * lk) + lam * (1.0 - lk);
  trace.multiplier = nu;
  auto fprime = [&](double p) {
    return (lam + 1.0) * std::exp(lam * std::log(p)) - lam * (std::log(p) + 1.0) + nu;
  };
  auto fsecond = [&](double p) {
    return (lam + 1.0) * lam * std::exp((lam - 1.0) * std::log(p)) - lam / p;
  };
  trace.sign_change_point =
      lam == 0.0 ? std::exp(-1.0) : std::exp(-std::log1p(lam) / lam);

  // 1/K is stationary by the choice of nu; scan (0, 1] for any other root.
  trace.stationary_points.push_back(1.0 / k);
  trace.second_derivatives.push_back(fsecond(1.0 / k));
  if (lam != 0.0) {
    constexpr int kGrid = 4000;
    auto grid_point = [](int i) { return std::pow(10.0, -12.0 + 12.0 * i / kGrid); };
    double prev_p = grid_point(0);
    double prev_v = fprime(prev_p);
    for (int i = 1; i <= kGrid; ++i) {
      const double p = grid_point(i);
      const double v = fprime(p);
      if ((prev_v < 0.0) != (v < 0.0)) {
        double lo = prev_p, hi = p;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
          const double mid = 0.5 * (lo + hi);
          if ((fprime(mid) < 0.0) == (prev_v < 0.0)) lo = mid; else hi = mid;
        }
        const double root = 0.5 * (lo + hi);
        if (std::abs(root - 1.0 / k) > 1e-9) {
          trace.stationary_points.push_back(root);
          trace.second_derivatives.push_back(fsecond(root));
        }
      }
      prev_p = p;
      prev_v = v;
    }
  }
  return trace;
}

double appendix_g(double lambda, std::size_t K) {
  const auto k = static_cast<double>(K);
  const double lk = std::log(k);
  return (lambda - lambda / k + 1.0) * std::exp(-lambda * lk) +
         lambda * (1.0 / k + lk - 1.0) - 1.0;
}

AppendixReport appendix_g_check(std::size_t K, const GridSpec& grid) {
  if (K < 5) throw DomainError("the g check needs K >= 5");
  if (grid.points < 2) throw InvalidArgument("grid needs at least two points");
  AppendixReport r;
  r.K = K;
  r.threshold = f_lemma_threshold(K);
  auto g = [K](double lam) { return appendix_g(lam, K); };

  r.min_g = std::numeric_limits<double>::infinity();
  const double span = grid.upper - r.threshold;
  const double step = span / static_cast<double>(grid.points - 1);
  auto visit = [&](double lam) {
    const double v = g(lam);
    if (v < r.min_g) {
      r.min_g = v;
      r.argmin_g = lam;
    }
  };
  for (std::size_t i = 0; i < grid.points; ++i) {
    visit(r.threshold + span * static_cast<double>(i) / static_cast<double>(grid.points - 1));
  }
  visit(0.0);
  r.nonnegative = r.min_g >= -1e-12;

  r.g_at_zero = g(0.0);
  constexpr double h1 = 1e-6;
  r.dg_at_zero = (g(h1) - g(-h1)) / (2.0 * h1);
  r.zero_at_origin = r.g_at_zero == 0.0 && std::abs(r.dg_at_zero) <= 1e-9;

  constexpr double h2 = 1e-4;
  auto d2 = [&](double lam) { return (g(lam + h2) - 2.0 * g(lam) + g(lam - h2)) / (h2 * h2); };
  r.d2g_at_threshold = d2(r.threshold);
  r.d2g_below = d2(r.threshold - step);
  r.d2g_above = d2(r.threshold + step);
  r.sign_flip = r.d2g_below < 0.0 && r.d2g_above > 0.0;
  return r;
}

std::pair<double, double> plogsq_scalar_max() noexcept {
  const double argmax = std::exp(-2.0);
  return {argmax, 4.0 * argmax};
}

}  // namespace entconc
