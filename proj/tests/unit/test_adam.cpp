#include "doctest.h"

#include <cmath>

#include "embopt/adam.hpp"
#include "embopt/clock.hpp"
#include "embopt/error.hpp"
#include "embopt/random.hpp"
#include "support/functions.hpp"

using namespace embopt;

namespace {

AdamConfig table_config(double wd = 0.0) {
  AdamConfig c;
  c.weight_decay = wd;
  return c;
}

/// Analytic objective F(z) = -|z|^2 / 2, so L = 1 + |z|^2 / 2.
class HalfSphere final : public Objective {
 public:
  explicit HalfSphere(std::size_t d) : d_(d) {}
  std::size_t dimension() const override { return d_; }
  Evaluation evaluate(std::span<const double> z) override {
    const double v = 0.5 * embopt::testing::neg_sphere(z);
    return Evaluation{MetricScores{v, 0, 0}, FitnessValue{v, v, 0}};
  }
  GradientCapability gradient_capability() const override { return GradientCapability::analytic; }
  std::vector<double> fitness_gradient(std::span<const double> z) override {
    std::vector<double> g(z.begin(), z.end());
    for (auto& x : g) x = -x;
    return g;
  }

 private:
  std::size_t d_;
};

}  // namespace

TEST_CASE("first step from the published hyperparameters") {
  auto s = AdamState::initial(std::vector<double>{0.0});
  adam_step(s, table_config(), std::vector<double>{1.0});
  CHECK(std::abs(s.z[0] - (-0.005)) <= 1e-9);
  CHECK(s.t == 1);
}

TEST_CASE("zero gradient and decoupled decay") {
  auto s = AdamState::initial(std::vector<double>{0.25, -3.0});
  adam_step(s, table_config(), std::vector<double>{0.0, 0.0});
  CHECK(s.z == std::vector<double>{0.25, -3.0});
  CHECK(s.t == 1);

  auto d = AdamState::initial(std::vector<double>{1.0});
  adam_step(d, table_config(1e-5), std::vector<double>{0.0});
  CHECK(std::abs(d.z[0] - (1.0 - 5e-8)) <= 1e-15);
}

TEST_CASE("multi-step trajectories match the reference computation") {
  const std::vector<std::vector<double>> grads{{1.0, -2.0, 0.0}, {0.5, 0.25, -1.0}, {-0.3, 1.0, 2.0}};
  auto s = AdamState::initial(std::vector<double>{0.2, -0.4, 1.0});
  for (const auto& g : grads) adam_step(s, table_config(1e-5), g);
  CHECK(s.z[0] == doctest::Approx(0.18788896939177763).epsilon(1e-13));
  CHECK(s.z[1] == doctest::Approx(-0.39188672713212125).epsilon(1e-13));
  CHECK(s.z[2] == doctest::Approx(1.002085372762611).epsilon(1e-13));
  CHECK(s.t == 3);

  AdamConfig coupled = table_config(0.1);
  coupled.decay_mode = WeightDecayMode::coupled_l2;
  auto c = AdamState::initial(std::vector<double>{0.2, -0.4, 1.0});
  for (const auto& g : grads) adam_step(c, coupled, g);
  CHECK(c.z[0] == doctest::Approx(0.18777481545908606).epsilon(1e-13));
  CHECK(c.z[1] == doctest::Approx(-0.39164651523046573).epsilon(1e-13));
  CHECK(c.z[2] == doctest::Approx(0.9963702007587345).epsilon(1e-13));
}

TEST_CASE("step properties on random inputs") {
  Rng rng(RngSeed{21});
  const auto cfg = table_config();
  for (int trial = 0; trial < 500; ++trial) {
    const auto z0 = standard_normal_draws(rng, 5);
    auto g = standard_normal_draws(rng, 5);
    for (auto& x : g) x *= std::pow(10.0, 6.0 * rng.uniform() - 3.0);
    auto s = AdamState::initial(z0);
    adam_step(s, cfg, g);
    for (std::size_t j = 0; j < 5; ++j) {
      const double expected = -cfg.learning_rate * g[j] / (std::abs(g[j]) + cfg.epsilon);
      CHECK(s.z[j] - z0[j] == doctest::Approx(expected).epsilon(1e-9));
      CHECK(std::abs(s.z[j] - z0[j]) <= cfg.learning_rate * (1.0 + 1e-12));
    }
    for (int k = 0; k < 5; ++k) {
      adam_step(s, cfg, standard_normal_draws(rng, 5));
      for (double v : s.v) REQUIRE(v >= 0.0);
    }
    CHECK(s.t == 6);
  }
}

TEST_CASE("step preconditions") {
  auto s = AdamState::initial(std::vector<double>{0.0, 0.0});
  CHECK_THROWS_AS(adam_step(s, table_config(), std::vector<double>{1.0}), ValidationError);
  CHECK_THROWS_AS(adam_step(s, table_config(), std::vector<double>{1.0, std::nan("")}), ValidationError);
  CHECK(s.t == 0);
  AdamConfig bad;
  bad.beta1 = 1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = AdamConfig{};
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("finite-difference gradient") {
  std::size_t calls = 0;
  const LossFunction square = [&](std::span<const double> z) {
    ++calls;
    return z[0] * z[0];
  };
  const auto g = finite_difference_gradient(square, std::vector<double>{1.0}, 1e-3);
  CHECK(std::abs(g[0] - 2.0) <= 1e-6);
  CHECK(calls == 2);

  const LossFunction constant = [](std::span<const double>) { return 3.0; };
  CHECK(finite_difference_gradient(constant, std::vector<double>{1.0, 2.0, 3.0}, 1e-3) ==
        std::vector<double>(3, 0.0));

  Rng rng(RngSeed{4});
  const LossFunction sum = [](std::span<const double> z) {
    double s = 0.0;
    for (double x : z) s += x;
    return s;
  };
  for (int trial = 0; trial < 20; ++trial) {
    auto z = standard_normal_draws(rng, 7);
    for (auto& x : z) x *= 5.0;
    for (double v : finite_difference_gradient(sum, z, 1e-3)) CHECK(std::abs(v - 1.0) <= 1e-9);
  }

  CHECK_THROWS_AS(finite_difference_gradient(square, std::vector<double>{1.0}, 0.0), ValidationError);
}

TEST_CASE("finite differences are accurate on random quadratics") {
  Rng rng(RngSeed{77});
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 6;
    std::vector<double> A(d * d), b = standard_normal_draws(rng, d);
    for (auto& x : A) x = rng.normal();
    const double c = rng.normal();
    std::size_t calls = 0;
    const LossFunction q = [&](std::span<const double> z) {
      ++calls;
      double v = c;
      for (std::size_t i = 0; i < d; ++i) {
        v += b[i] * z[i];
        for (std::size_t j = 0; j < d; ++j) v += 0.5 * z[i] * A[i * d + j] * z[j];
      }
      return v;
    };
    const auto z = standard_normal_draws(rng, d);
    const auto g = finite_difference_gradient(q, z, 1e-3);
    CHECK(calls == 2 * d);
    for (std::size_t i = 0; i < d; ++i) {
      double exact = b[i];
      for (std::size_t j = 0; j < d; ++j) exact += 0.5 * (A[i * d + j] + A[j * d + i]) * z[j];
      CHECK(std::abs(g[i] - exact) < 1e-6);
    }
  }
}

TEST_CASE("finite differences report the failing coordinate") {
  const LossFunction failing = [](std::span<const double> z) {
    if (z[2] > 0.5) throw std::runtime_error("timeout");
    return 0.0;
  };
  try {
    finite_difference_gradient(failing, std::vector<double>{0.0, 0.0, 0.5, 0.0}, 1e-3);
    FAIL("expected ObjectiveError");
  } catch (const ObjectiveError& e) {
    CHECK(e.coordinate() == 2);
  }
  const LossFunction nan_loss = [](std::span<const double> z) { return z[1] < 0 ? std::nan("") : 0.0; };
  CHECK_THROWS_AS(finite_difference_gradient(nan_loss, std::vector<double>{0.0, 0.0}, 1e-3), ObjectiveError);
}

TEST_CASE("quadratic convergence within the pinned step count") {
  HalfSphere obj(8);
  VirtualClock clock;
  const auto r = run_adam(obj, EmbeddingVector(std::vector<double>(8, 1.0)), table_config(), 5000, clock);
  CHECK(r.completed);
  double inf_norm = 0.0;
  for (double x : r.final_point.data()) inf_norm = std::max(inf_norm, std::abs(x));
  CHECK(inf_norm < 1e-2);
  CHECK(r.trace.entries.size() == 5000);
  CHECK(r.trace.entries.back().evaluations == 5000);
}

TEST_CASE("run: trace bookkeeping") {
  HalfSphere obj(3);
  VirtualClock clock;
  const EmbeddingVector z0({0.5, -0.5, 2.0});
  const auto one = run_adam(obj, z0, table_config(), 1, clock);
  CHECK(one.trace.entries.size() == 1);
  CHECK(one.best->embedding == z0);

  const auto r = run_adam(obj, z0, AdamConfig{}, 200, clock);
  for (std::size_t i = 0; i < r.trace.entries.size(); ++i) {
    const auto& e = r.trace.entries[i];
    CHECK(e.loss == 1.0 - e.fitness);
    CHECK(e.iteration == i + 1);
    if (i > 0) CHECK(e.best_fitness >= r.trace.entries[i - 1].best_fitness);
  }
  const auto again = run_adam(obj, z0, AdamConfig{}, 200, clock);
  CHECK(again.final_point == r.final_point);
  CHECK(again.best->embedding == r.best->embedding);
  CHECK_THROWS_AS(run_adam(obj, z0, AdamConfig{}, 0, clock), ValidationError);
}

TEST_CASE("run: finite-difference path costs 1 + 2d evaluations per step") {
  embopt::testing::FunctionObjective obj(4, embopt::testing::neg_sphere);
  VirtualClock clock;
  CHECK(adam_evaluations_per_step(obj) == 9);
  const auto r = run_adam(obj, EmbeddingVector(std::vector<double>(4, 1.0)), AdamConfig{}, 10, clock);
  CHECK(obj.calls == 90);
  CHECK(r.trace.entries.back().evaluations == 90);
  CHECK(r.trace.entries.back().best_fitness > -4.0);
  CHECK(adam_evaluations_per_step(HalfSphere(4)) == 1);
}

TEST_CASE("run: gradient failure aborts with the partial trace") {
  int calls = 0;
  embopt::testing::FunctionObjective flaky(2, [&](std::span<const double> z) {
    if (++calls > 12) throw std::runtime_error("503");
    return embopt::testing::neg_sphere(z);
  });
  VirtualClock clock;
  const auto r = run_adam(flaky, EmbeddingVector({1.0, 1.0}), AdamConfig{}, 10, clock);
  CHECK_FALSE(r.completed);
  CHECK(r.trace.entries.size() == 2);
  CHECK(r.error.find("coordinate") != std::string::npos);
}
