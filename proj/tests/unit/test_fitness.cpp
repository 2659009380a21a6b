#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "embopt/error.hpp"
#include "embopt/fitness.hpp"
#include "embopt/random.hpp"

using namespace embopt;

namespace {
FitnessConfig weights(double a, double b) { return FitnessConfig{a, b, 10.0, 0.5}; }
}  // namespace

TEST_CASE("clip_score") {
  const std::vector<double> v{0.3, -1.2, 4.0};
  CHECK(clip_score(v, v) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(clip_score(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
  CHECK(clip_score(std::vector<double>{1, 0}, std::vector<double>{1, 1}) == doctest::Approx(0.7071068).epsilon(1e-6));
  CHECK_THROWS_AS(clip_score(std::vector<double>{0, 0}, std::vector<double>{1, 1}), DomainError);
  CHECK_THROWS_AS(clip_score(std::vector<double>{1, 0}, std::vector<double>{1}), ValidationError);
  CHECK_THROWS_AS(clip_score(std::vector<double>{}, std::vector<double>{}), ValidationError);
}

TEST_CASE("clip_score is invariant to positive rescaling") {
  Rng rng(RngSeed{5});
  for (int i = 0; i < 100; ++i) {
    auto u = standard_normal_draws(rng, 8);
    auto v = standard_normal_draws(rng, 8);
    const double s = 0.01 + 100.0 * rng.uniform();
    auto us = u;
    for (auto& x : us) x *= s;
    CHECK(clip_score(us, v) == doctest::Approx(clip_score(u, v)).epsilon(1e-12));
    CHECK(clip_score(u, us) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("normalize") {
  CHECK(normalize(7.21, 10.0) == doctest::Approx(0.721).epsilon(1e-12));
  CHECK(normalize(0.3084, 0.5) == doctest::Approx(0.6168).epsilon(1e-12));
  CHECK(normalize(0.0, 3.0) == 0.0);
  CHECK(normalize(12.0, 10.0) == doctest::Approx(1.2));  // no clamping
  CHECK_THROWS_AS(normalize(1.0, 0.0), ValidationError);
  CHECK_THROWS_AS(normalize(1.0, -2.0), ValidationError);
}

TEST_CASE("fitness reproduces the published table arithmetic") {
  const auto f = fitness(MetricScores{6.13, 0.3084, 0}, weights(0.5, 0.5));
  CHECK(std::abs(f.value - 0.6149) <= 5e-4);
  CHECK(f.norm_aesthetic == doctest::Approx(0.613));
  CHECK(f.norm_clip == doctest::Approx(0.6168));

  for (double clip : {-1.0, 0.0, 0.3, 1.0}) {
    CHECK(std::abs(fitness(MetricScores{8.01, clip, 0}, weights(1, 0)).value - 0.801) <= 5e-4);
  }
  for (auto [a, b] : {std::pair{1.0, 0.0}, {0.5, 0.5}, {0.0, 1.0}, {0.2, 3.0}}) {
    CHECK(fitness(MetricScores{0, 0, 0}, weights(a, b)).value == 0.0);
  }
}

TEST_CASE("fitness config validation") {
  CHECK_NOTHROW(FitnessConfig{}.validate());
  CHECK_THROWS_AS(fitness(MetricScores{1, 1, 0}, FitnessConfig{-0.1, 1, 10, 0.5}), ValidationError);
  CHECK_THROWS_AS(fitness(MetricScores{1, 1, 0}, FitnessConfig{0, 0, 10, 0.5}), ValidationError);
  CHECK_THROWS_AS(fitness(MetricScores{1, 1, 0}, FitnessConfig{1, 0, 0, 0.5}), ValidationError);
  CHECK_THROWS_AS(fitness(MetricScores{1, 1, 0}, FitnessConfig{1, 0, 10, -1}), ValidationError);
}

TEST_CASE("loss") {
  CHECK(loss(0.8012) == doctest::Approx(0.1988).epsilon(1e-12));
  CHECK(loss(1.0) == 0.0);
  CHECK(loss(0.0) == 1.0);
}

TEST_CASE("fitness properties on random scores") {
  Rng rng(RngSeed{11});
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform();
    const double b = rng.uniform() + 1e-3;
    const FitnessConfig cfg{a, b, 1.0 + 20.0 * rng.uniform(), 0.1 + rng.uniform()};
    const MetricScores s{1.0 + 9.0 * rng.uniform(), 2.0 * rng.uniform() - 1.0, 0};
    const auto f = fitness(s, cfg);

    // exact composition and duality
    CHECK(f.value == doctest::Approx(a * f.norm_aesthetic + b * f.norm_clip).epsilon(1e-14));
    CHECK(loss(f.value) == 1.0 - f.value);

    // linear in each raw score
    const double k = 0.1 + 3.0 * rng.uniform();
    CHECK(fitness(MetricScores{k * s.aesthetic, s.clip, 0}, cfg).norm_aesthetic ==
          doctest::Approx(k * f.norm_aesthetic).epsilon(1e-12));
    CHECK(fitness(MetricScores{s.aesthetic, k * s.clip, 0}, cfg).norm_clip ==
          doctest::Approx(k * f.norm_clip).epsilon(1e-12));

    // unused score does not matter
    const double other = 2.0 * rng.uniform() - 1.0;
    CHECK(fitness(s, weights(1, 0)).value == fitness(MetricScores{s.aesthetic, other, 0}, weights(1, 0)).value);
    CHECK(fitness(s, weights(0, 1)).value == fitness(MetricScores{10.0 * other, s.clip, 0}, weights(0, 1)).value);
  }
}

TEST_CASE("argmax fitness equals argmin loss") {
  Rng rng(RngSeed{3});
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> f, l;
    for (int i = 0; i < 20; ++i) {
      const auto v = fitness(MetricScores{1 + 9 * rng.uniform(), rng.uniform(), 0}, FitnessConfig{}).value;
      f.push_back(v);
      l.push_back(loss(v));
    }
    CHECK(std::max_element(f.begin(), f.end()) - f.begin() == std::min_element(l.begin(), l.end()) - l.begin());
  }
}
