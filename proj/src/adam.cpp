#include "embopt/adam.hpp"

#include <cmath>
#include <string>

#include "embopt/error.hpp"
#include "embopt/fitness.hpp"

namespace embopt {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("adam: learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ValidationError("adam: betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ValidationError("adam: epsilon must be positive");
  if (!(weight_decay >= 0.0)) throw ValidationError("adam: weight decay must be non-negative");
  if (!(fd_step > 0.0)) throw ValidationError("adam: finite-difference step must be positive");
}

AdamState AdamState::initial(std::span<const double> z0) {
  AdamState s;
  s.z.assign(z0.begin(), z0.end());
  s.m.assign(z0.size(), 0.0);
  s.v.assign(z0.size(), 0.0);
  return s;
}

void adam_step(AdamState& state, const AdamConfig& config, std::span<const double> gradient) {
  if (gradient.size() != state.z.size()) throw ValidationError("adam step: gradient length mismatch");
  require_finite(gradient, "adam gradient");

  ++state.t;
  const double t = static_cast<double>(state.t);
  const double bias1 = 1.0 - std::pow(config.beta1, t);
  const double bias2 = 1.0 - std::pow(config.beta2, t);
  const bool coupled = config.decay_mode == WeightDecayMode::coupled_l2;
  const double alpha = config.learning_rate;

  for (std::size_t j = 0; j < state.z.size(); ++j) {
    const double g = coupled ? gradient[j] + config.weight_decay * state.z[j] : gradient[j];
    state.m[j] = config.beta1 * state.m[j] + (1.0 - config.beta1) * g;
    state.v[j] = config.beta2 * state.v[j] + (1.0 - config.beta2) * g * g;
    const double m_hat = state.m[j] / bias1;
    const double v_hat = state.v[j] / bias2;
    double update = m_hat / (std::sqrt(v_hat) + config.epsilon);
    if (!coupled) update += config.weight_decay * state.z[j];
    state.z[j] -= alpha * update;
  }
}

std::vector<double> finite_difference_gradient(const LossFunction& loss, std::span<const double> z, double h) {
  if (!(h > 0.0)) throw ValidationError("finite difference: step must be positive");
  std::vector<double> probe(z.begin(), z.end());
  std::vector<double> grad(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double center = probe[j];
    double plus = 0.0;
    double minus = 0.0;
    try {
      probe[j] = center + h;
      plus = loss(probe);
      probe[j] = center - h;
      minus = loss(probe);
    } catch (const std::exception& e) {
      throw ObjectiveError("finite difference: objective failed at coordinate " + std::to_string(j) + ": " +
                               e.what(),
                           j);
    }
    probe[j] = center;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw ObjectiveError("finite difference: non-finite loss at coordinate " + std::to_string(j), j);
    }
    grad[j] = (plus - minus) / (2.0 * h);
  }
  return grad;
}

std::size_t adam_evaluations_per_step(const Objective& objective) {
  if (objective.gradient_capability() == GradientCapability::analytic) return 1;
  return 1 + 2 * objective.dimension();
}

RunResult run_adam(Objective& objective, const EmbeddingVector& z0, const AdamConfig& config,
                   std::size_t iterations, const Clock& clock, const IterationObserver& observer) {
  config.validate();
  if (iterations < 1) throw ValidationError("adam run: iterations must be >= 1");
  if (objective.dimension() != z0.size()) throw ValidationError("adam run: objective dimension mismatch");
  if (objective.gradient_capability() == GradientCapability::none) {
    throw ValidationError("adam run: objective provides no gradient");
  }

  const bool analytic = objective.gradient_capability() == GradientCapability::analytic;
  AdamState state = AdamState::initial(z0.view());
  RunResult result;
  result.trace.optimizer_id = "adam";
  result.trace.entries.reserve(iterations);
  std::size_t evaluations = 0;

  const LossFunction probe_loss = [&](std::span<const double> z) {
    ++evaluations;
    return loss(objective.evaluate(z).fitness.value);
  };

  for (std::size_t step = 0; step < iterations; ++step) {
    const EmbeddingVector* improved = nullptr;
    Evaluation current;
    try {
      current = objective.evaluate(state.z);
      ++evaluations;
      if (!result.best || current.fitness.value > result.best->evaluation.fitness.value) {
        result.best = BestSeen{z0.with_data(state.z), current};
        improved = &result.best->embedding;
      }
      std::vector<double> grad;
      if (analytic) {
        grad = objective.fitness_gradient(state.z);
        for (auto& g : grad) g = -g;  // dL/dz = -dF/dz
      } else {
        grad = finite_difference_gradient(probe_loss, state.z, config.fd_step);
      }
      adam_step(state, config, grad);
    } catch (const std::exception& e) {
      result.completed = false;
      result.error = e.what();
      break;
    }

    TraceEntry entry;
    entry.iteration = step + 1;
    entry.evaluations = evaluations;
    entry.wall_seconds = clock.now();
    entry.best_fitness = result.best->evaluation.fitness.value;
    entry.best_scores = result.best->evaluation.scores;
    entry.fitness = current.fitness.value;
    entry.loss = loss(current.fitness.value);
    result.trace.entries.push_back(entry);
    if (observer) observer(entry, improved);
  }
  // A diverged iterate cannot be represented; fall back to the last finite one.
  try {
    result.final_point = z0.with_data(state.z);
  } catch (const ValidationError&) {
    result.final_point = result.best ? result.best->embedding : z0;
  }
  return result;
}

}  // namespace embopt
