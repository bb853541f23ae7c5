// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <vector>

#include "entconc/bounds.hpp"
#include "entconc/error.hpp"
#include "entconc/mgf.hpp"
#include "support/oracles.hpp"

using namespace entconc;
using doctest::Approx;

TEST_SUITE("mgf") {
  TEST_CASE("exact MGF at known points") {
    const ProbVector p({0.75, 0.25});
    CHECK(mgf_exact(0.0, p).value == 1.0);
    CHECK(mgf_exact(1.0, p).value == Approx(1.096728344127077).epsilon(1e-14));
    CHECK(f_objective(1.0, p) == Approx(0.1873351446188083).epsilon(1e-13));
    for (std::size_t k : {2u, 5u, 64u}) {
      CHECK(mgf_exact(0.7, ProbVector::uniform(k)).value == 1.0);
    }
    CHECK_THROWS_AS(mgf_exact(-1.0, p), DomainError);
    CHECK_THROWS_AS(f_objective(-1.5, p), DomainError);
  }

  TEST_CASE("exact MGF agrees with the product form") {
    RandomStream s(11, StreamPurpose::test, 0);
    for (std::size_t k : {2u, 3u, 5u, 9u, 40u}) {
      for (int i = 0; i < 50; ++i) {
        const auto p = i % 2 ? random_simplex(k, s) : boundary_heavy_simplex(k, s);
        const std::vector<double> pv(p.begin(), p.end());
        for (double lam : {-0.9, -0.3, -0.01, 0.05, 0.5, 1.0, 3.0}) {
          const double a = mgf_exact(lam, p).value;
          const double b = oracle::mgf_product_form(lam, pv);
          CHECK(a == Approx(b).epsilon(1e-11));
          // F + 1 + lambda sum p log p is the power sum, which is M_Y times exp(lambda sum p log p).
          CHECK(f_objective(lam, p) + 1.0 + lam * negentropy(p) ==
                Approx(b * std::exp(lam * negentropy(p))).epsilon(1e-11));
        }
      }
    }
  }

  TEST_CASE("admissible lambda domain and the uniform upper bound") {
    CHECK(lambda_domain(20).lower == Approx(-0.33380820069533407).epsilon(1e-13));
    CHECK(lambda_domain(5).lower == Approx(-0.007330130880776411).epsilon(1e-12));
    CHECK(std::isinf(lambda_domain(5).upper));
    CHECK(mgf_upper(1.0, 5) == Approx(13.333643050722568).epsilon(1e-13));
    CHECK(mgf_upper(-0.005, 5) == Approx(1.000064759356646).epsilon(1e-13));
    CHECK(mgf_upper(0.3, 2) == mgf_upper(0.3, 5));
    CHECK(mgf_upper(lambda_domain(8).lower, 8) > 1.0);
    CHECK_THROWS_AS(mgf_upper(-0.01, 5), DomainError);
  }

  TEST_CASE("closed-form F at the uniform point") {
    CHECK(f_closed_form(1.0, 5) == Approx(0.8094379124341002).epsilon(1e-14));
    CHECK(f_closed_form(-0.005, 5) == Approx(3.246565725993633e-05).epsilon(1e-10));
    CHECK(f_closed_form(0.0, 17) == 0.0);
    for (std::size_t k : {5u, 16u, 100u}) {
      for (double lam : {-0.003, 0.2, 1.5}) {
        CHECK(f_closed_form(lam, k) == Approx(f_objective(lam, ProbVector::uniform(k))).epsilon(1e-10));
      }
    }
    // The F threshold coincides with -1/b* for these K.
    for (std::size_t k : {5u, 16u}) CHECK(f_lemma_threshold(k) == Approx(-1.0 / bstar(k)));
  }

  TEST_CASE("Lagrangian stationary points of the variance objective") {
    const auto t = lagrangian_stationary(5, Objective::variance);
    CHECK(t.multiplier == Approx(0.6285854308879659).epsilon(1e-14));
    REQUIRE(t.stationary_points.size() == 2);
    CHECK(t.stationary_points[0] == Approx(0.2));
    CHECK(t.stationary_points[1] == Approx(0.6766764161830634).epsilon(1e-14));
    // h'' changes sign at 1/e: negative at 1/K < 1/e, positive at e^(L-2) > 1/e.
    CHECK(t.second_derivatives[0] < 0.0);
    CHECK(t.second_derivatives[1] > 0.0);
    // h'(p) vanishes at both.
    for (double p : t.stationary_points) {
      const double l = std::log(p);
      CHECK(l * l + 2 * l + t.multiplier == Approx(0.0).scale(1.0));
    }
  }

  TEST_CASE("Lagrangian stationary points of F") {
    for (std::size_t k : {5u, 16u}) {
      for (double lam : {-0.001, 0.1, 1.0, 2.0}) {
        const auto t = lagrangian_stationary(k, Objective::f_at_lambda, lam);
        REQUIRE(t.sign_change_point.has_value());
        CHECK(*t.sign_change_point == Approx(std::exp(-std::log1p(lam) / lam)));
        CHECK(t.stationary_points.front() == Approx(1.0 / double(k)));
        CHECK(t.second_derivatives.front() < 0.0);
        for (double p : t.stationary_points) {
          const double d = (lam + 1) * std::pow(p, lam) - lam * (std::log(p) + 1) + t.multiplier;
          CHECK(d == Approx(0.0).scale(1.0));
        }
      }
    }
    CHECK(*lagrangian_stationary(5, Objective::f_at_lambda, 0.0).sign_change_point ==
          Approx(std::exp(-1.0)));
    CHECK_THROWS_AS(lagrangian_stationary(5, Objective::f_at_lambda), InvalidArgument);
  }

  TEST_CASE("variance oracle") {
    for (std::size_t k : {5u, 7u}) {
      const auto t = variance_max_oracle(k);
      CHECK(t.closed_form_applies);
      CHECK(t.oracle_value == Approx(std::log(double(k)) * std::log(double(k))).epsilon(1e-9));
      CHECK(t.gap < 1e-8);
      for (double v : t.maximizer) CHECK(v == Approx(1.0 / double(k)).epsilon(1e-4));
    }
    // K = 2: the maximum sits strictly above (log 2)^2, away from uniform.
    const auto two = variance_max_oracle(2);
    CHECK_FALSE(two.closed_form_applies);
    CHECK(two.oracle_value == Approx(0.5628799120563879).epsilon(1e-10));
    const double lo = std::min(two.maximizer[0], two.maximizer[1]);
    CHECK(lo == Approx(0.16137820985148149).epsilon(1e-5));
    // K = 3, 4: reported without a closed-form claim; uniform is at least a candidate.
    for (std::size_t k : {3u, 4u}) {
      CHECK(variance_max_oracle(k).oracle_value >= std::log(double(k)) * std::log(double(k)) - 1e-12);
    }
    CHECK_THROWS_AS(variance_max_oracle(1), InvalidArgument);
    CHECK_THROWS_AS(variance_max_oracle(65), InvalidArgument);
  }

  TEST_CASE("F oracle") {
    const auto t = f_max_oracle(1.0, 5);
    CHECK(t.oracle_value == Approx(0.8094379124341002).epsilon(1e-9));
    CHECK(t.gap < 1e-8);
    CHECK_THROWS_AS(f_max_oracle(1.0, 4), DomainError);
    CHECK_THROWS_AS(f_max_oracle(-0.5, 5), DomainError);
  }

  TEST_CASE("oracle results do not depend on the worker count") {
    OracleConfig one;
    OracleConfig many;
    many.workers = 4;
    const auto a = variance_max_oracle(6, one);
    const auto b = variance_max_oracle(6, many);
    CHECK(a.oracle_value == b.oracle_value);
    CHECK(a.maximizer == b.maximizer);
    CHECK(a.winning_start == b.winning_start);
  }

  TEST_CASE("auxiliary function g") {
    CHECK(appendix_g(1.0, 5) == Approx(0.16943791243410034).epsilon(1e-13));
    CHECK(appendix_g(0.0, 7) == 0.0);
    for (std::size_t k : {5u, 10u, 50u, 1000u}) {
      const auto r = appendix_g_check(k);
      CHECK(r.passed());
      CHECK(r.min_g >= -1e-12);
      CHECK(r.g_at_zero == 0.0);
      CHECK(std::abs(r.dg_at_zero) <= 1e-9);
    }
    CHECK_THROWS_AS(appendix_g_check(4), DomainError);
  }

  TEST_CASE("scalar maximum of p (log p)^2") {
    const auto [arg, val] = plogsq_scalar_max();
    CHECK(arg == Approx(0.1353352832366127));
    CHECK(val == Approx(0.5413411329464508));
    CHECK(arg * std::log(arg) * std::log(arg) == Approx(val));
  }
}
