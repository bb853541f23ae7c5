// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "entconc/error.hpp"
#include "entconc/simplex.hpp"

using namespace entconc;

TEST_SUITE("simplex") {
  TEST_CASE("construction enforces the simplex") {
    CHECK_NOTHROW(ProbVector({0.5, 0.5}));
    CHECK_THROWS_AS(ProbVector({1.0}), InvalidArgument);
    CHECK_THROWS_AS(ProbVector({0.6, 0.6}), InvalidArgument);
    CHECK_THROWS_AS(ProbVector({1.2, -0.2}), InvalidArgument);
    CHECK_THROWS_AS(ProbVector({0.5, 0.5 + 1e-10}), InvalidArgument);
    CHECK_NOTHROW(ProbVector({0.5, 0.5 + 1e-13}));
    CHECK_THROWS_AS(ProbVector({std::nan(""), 1.0}), InvalidArgument);

    const auto r = ProbVector::relaxed({0.9, 0.9, 0.0});
    CHECK_FALSE(r.on_simplex());
    CHECK_THROWS_AS(ProbVector::relaxed({1.5, 0.0}), InvalidArgument);
  }

  TEST_CASE("shape predicates and padding") {
    const ProbVector p({0.25, 0.75, 0.0});
    CHECK_FALSE(p.interior());
    CHECK_FALSE(p.degenerate());
    CHECK(ProbVector({0.0, 1.0}).degenerate());
    CHECK(ProbVector::uniform(4).interior());
    const auto q = p.padded(5);
    CHECK(q.size() == 5);
    CHECK(q[3] == 0.0);
    CHECK(q[4] == 0.0);
    CHECK(p.padded(2) == p);
  }

  TEST_CASE("entropy values") {
    CHECK(entropy(ProbVector::uniform(8), LogBase::bits) == doctest::Approx(3.0));
    CHECK(entropy(ProbVector({1.0, 0.0})) == 0.0);
    CHECK(entropy(ProbVector({0.5, 0.25, 0.25}), LogBase::bits) == doctest::Approx(1.5));
    CHECK(negentropy(ProbVector({0.5, 0.5})) == doctest::Approx(-std::log(2.0)));
    CHECK(to_base(std::log(2.0), LogBase::bits) == doctest::Approx(1.0));
    CHECK(to_nats(1.0, LogBase::bits) == doctest::Approx(std::log(2.0)));
  }

  TEST_CASE("second moment and variance of the log-likelihood") {
    const ProbVector p({0.75, 0.25});
    CHECK(second_moment_loglik(p) == doctest::Approx(0.5425237450258151).epsilon(1e-14));
    CHECK(loglik_variance(p) == doctest::Approx(0.22630293015235908).epsilon(1e-12));
    CHECK(loglik_variance(ProbVector::uniform(7)) == doctest::Approx(0.0));
  }

  TEST_CASE("centered scores") {
    const auto y = centered_scores(ProbVector({0.75, 0.25}));
    CHECK(y[0] == doctest::Approx(0.2746530721670274).epsilon(1e-14));
    CHECK(y[1] == doctest::Approx(-0.8239592165010823).epsilon(1e-14));

    for (std::size_t k : {2u, 3u, 5u, 17u, 100u}) {
      for (double v : centered_scores(ProbVector::uniform(k))) CHECK(v == 0.0);
    }

    // The mean is zero under the sampling distribution.
    const ProbVector q({0.1, 0.2, 0.3, 0.4, 0.0});
    const auto s = centered_scores(q);
    double mean = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) mean += q[k] * s[k];
    CHECK(std::abs(mean) < 1e-15);
    CHECK(s[4] == 0.0);
  }

  TEST_CASE("misspecified scores reduce to the plain scores when the model is true") {
    const ProbVector p({0.6, 0.3, 0.1});
    CHECK(centered_scores(p, p) == centered_scores(p));
    CHECK_THROWS_AS(centered_scores(p, ProbVector({0.5, 0.5, 0.0})), InvalidArgument);
  }

  TEST_CASE("centered log-likelihood of a single draw") {
    const ProbVector p({0.75, 0.25});
    const auto s = centered_loglik(OneHotSample{1}, p);
    CHECK(s.loglik == doctest::Approx(std::log(0.25)));
    CHECK(s.centered == doctest::Approx(-0.8239592165010823));
    CHECK_THROWS_AS(centered_loglik(OneHotSample{1}, ProbVector({1.0, 0.0})), ImpossibleSample);
  }

  TEST_CASE("mean over a parameter set") {
    const ParamSet params({ProbVector({0.75, 0.25}), ProbVector::uniform(2)});
    const std::vector<OneHotSample> z{{0}, {1}};
    CHECK(mean_centered_loglik(z, params) == doctest::Approx(0.2746530721670274 / 2));
    const std::vector<OneHotSample> short_z{{0}};
    CHECK_THROWS_AS(mean_centered_loglik(short_z, params), InvalidArgument);
  }

  TEST_CASE("parameter sets validate their members") {
    CHECK_THROWS_AS(ParamSet({}), InvalidArgument);
    CHECK_THROWS_AS(ParamSet({ProbVector::uniform(2), ProbVector::uniform(3)}), InvalidArgument);
    CHECK_THROWS_AS(ParamSet({ProbVector::relaxed({0.5, 0.9})}), InvalidArgument);
    const auto rep = ParamSet::repeated(ProbVector({1.0, 0.0}), 4);
    CHECK(rep.size() == 4);
    CHECK(rep.all_degenerate());
  }

  TEST_CASE("sampler never returns zero-probability categories") {
    const ProbVector p({0.0, 0.5, 0.0, 0.5, 0.0});
    const CategoricalSampler sampler(p);
    CHECK(sampler.pick(0.0) == 1);
    CHECK(sampler.pick(0.49999) == 1);
    CHECK(sampler.pick(0.5) == 3);
    CHECK(sampler.pick(std::nextafter(1.0, 0.0)) == 3);
    RandomStream s(1, StreamPurpose::test, 0);
    for (int i = 0; i < 10000; ++i) {
      const auto k = sampler(s);
      REQUIRE((k == 1 || k == 3));
    }
  }

  TEST_CASE("sampler frequencies match the distribution") {
    const ProbVector p({0.1, 0.2, 0.3, 0.4});
    RandomStream s(99, StreamPurpose::test, 1);
    std::vector<int> counts(4, 0);
    constexpr int kDraws = 400000;
    for (int i = 0; i < kDraws; ++i) ++counts[sample(p, s).category];
    for (std::size_t k = 0; k < 4; ++k) {
      const double f = static_cast<double>(counts[k]) / kDraws;
      const double sd = std::sqrt(p[k] * (1 - p[k]) / kDraws);
      CHECK(std::abs(f - p[k]) < 5 * sd);
    }
  }

  TEST_CASE("random generators land on the simplex") {
    RandomStream s(5, StreamPurpose::test, 2);
    for (std::size_t k : {2u, 3u, 5u, 20u, 100u}) {
      for (int i = 0; i < 200; ++i) {
        const auto a = random_simplex(k, s);
        const auto b = boundary_heavy_simplex(k, s);
        CHECK(a.on_simplex());
        CHECK(b.on_simplex());
        CHECK(a.size() == k);
        CHECK(*std::max_element(b.begin(), b.end()) >= 1e-3);
      }
    }
  }

  TEST_CASE("boundary-heavy draws actually reach the boundary") {
    RandomStream s(6, StreamPurpose::test, 3);
    int with_zero = 0;
    int with_tiny = 0;
    for (int i = 0; i < 500; ++i) {
      const auto b = boundary_heavy_simplex(8, s);
      with_zero += !b.interior();
      with_tiny += std::any_of(b.begin(), b.end(), [](double v) { return v > 0 && v < 1e-6; });
    }
    CHECK(with_zero > 100);
    CHECK(with_tiny > 50);
  }
}
