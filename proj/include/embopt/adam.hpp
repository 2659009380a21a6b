#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "embopt/clock.hpp"
#include "embopt/embedding.hpp"
#include "embopt/objective.hpp"
#include "embopt/trace.hpp"

namespace embopt {

enum class WeightDecayMode {
  decoupled,  // z -= alpha * wd * z, outside the moment estimates (AdamW)
  coupled_l2  // g += wd * z before the moment estimates
};

struct AdamConfig {
  double learning_rate = 5e-3;
  double beta1 = 0.85;
  double beta2 = 0.98;
  double epsilon = 1e-8;
  double weight_decay = 1e-5;
  WeightDecayMode decay_mode = WeightDecayMode::decoupled;
  double fd_step = 1e-3;  // only used by the finite-difference gradient path

  void validate() const;
};

struct AdamState {
  std::vector<double> z;
  std::vector<double> m;
  std::vector<double> v;
  std::size_t t = 0;

  static AdamState initial(std::span<const double> z0);
};

/// One Adam update on dL/dz. Throws ValidationError on a non-finite gradient or length mismatch.
void adam_step(AdamState& state, const AdamConfig& config, std::span<const double> gradient);

using LossFunction = std::function<double(std::span<const double>)>;

/// Central differences (L(z + h e_j) - L(z - h e_j)) / 2h, exactly 2d calls.
/// A throwing or non-finite loss is reported as ObjectiveError carrying the coordinate.
std::vector<double> finite_difference_gradient(const LossFunction& loss, std::span<const double> z, double h);

/// T Adam steps minimizing 1 - F. The gradient comes from the objective when it is
/// analytic, from central differences otherwise. Each step evaluates the current iterate
/// once, then the gradient; best is the best evaluated iterate.
RunResult run_adam(Objective& objective, const EmbeddingVector& z0, const AdamConfig& config,
                   std::size_t iterations, const Clock& clock, const IterationObserver& observer = {});

/// Objective calls one Adam step costs for this objective.
std::size_t adam_evaluations_per_step(const Objective& objective);

}  // namespace embopt
