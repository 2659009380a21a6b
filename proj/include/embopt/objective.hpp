#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "embopt/clock.hpp"
#include "embopt/embedding.hpp"
#include "embopt/trace.hpp"
#include "embopt/types.hpp"

namespace embopt {

class Backend;

enum class GradientCapability { analytic, finite_difference, none };

/// What both optimizers maximize. Implementations for the synthetic and mock kinds
/// are pure functions of z.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::size_t dimension() const = 0;
  virtual Evaluation evaluate(std::span<const double> z) = 0;
  virtual GradientCapability gradient_capability() const { return GradientCapability::finite_difference; }
  /// dF/dz. Only objectives with analytic capability implement this.
  virtual std::vector<double> fitness_gradient(std::span<const double> z);
};

/// Desk-scale stand-in for generator + scorers:
///   aesthetic = 1 + 9 exp(-|z - z*|^2 / (2d)),  clip = cos(z, z*) (0 when a norm is 0).
MetricScores synthetic_scores(std::span<const double> z, std::span<const double> target);

/// Analytic dF/dz of a * aesthetic / D_a + b * clip / D_c for the synthetic scores.
/// Throws DomainError when |z| = 0 and b > 0.
std::vector<double> synthetic_gradient(std::span<const double> z, std::span<const double> target,
                                       const FitnessConfig& cfg);

class SyntheticObjective final : public Objective {
 public:
  SyntheticObjective(std::vector<double> target, FitnessConfig cfg);
  std::size_t dimension() const override { return target_.size(); }
  Evaluation evaluate(std::span<const double> z) override;
  GradientCapability gradient_capability() const override { return GradientCapability::analytic; }
  std::vector<double> fitness_gradient(std::span<const double> z) override;

 private:
  std::vector<double> target_;
  FitnessConfig cfg_;
};

/// Generation parameters forwarded with every backend request.
struct GenerationParams {
  std::uint64_t seed = 0;
  int inference_steps = 1;
  double guidance_scale = 0.0;
  int width = 512;
  int height = 512;
};

/// Scores candidates through a Backend (in-process mock or remote service).
class BackendObjective final : public Objective {
 public:
  BackendObjective(Backend& backend, std::string prompt, std::vector<std::size_t> shape, FitnessConfig cfg,
                   GenerationParams params = {});
  std::size_t dimension() const override;
  Evaluation evaluate(std::span<const double> z) override;

 private:
  Backend& backend_;
  std::string prompt_;
  std::vector<std::size_t> shape_;
  FitnessConfig cfg_;
  GenerationParams params_;
};

/// Advances a VirtualClock by a fixed cost per evaluation.
class ClockedObjective final : public Objective {
 public:
  ClockedObjective(Objective& inner, VirtualClock& clock, double seconds_per_evaluation)
      : inner_(inner), clock_(clock), cost_(seconds_per_evaluation) {}
  std::size_t dimension() const override { return inner_.dimension(); }
  Evaluation evaluate(std::span<const double> z) override;
  GradientCapability gradient_capability() const override { return inner_.gradient_capability(); }
  std::vector<double> fitness_gradient(std::span<const double> z) override;

 private:
  Objective& inner_;
  VirtualClock& clock_;
  double cost_;
};

enum class ObjectiveKind { remote_backend, synthetic, mock_backend };

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::synthetic;
  FitnessConfig fitness_config;
  std::string prompt;
  std::optional<EmbeddingVector> target;  // synthetic only
  std::string endpoint;                   // remote only, e.g. "http://127.0.0.1:8000"
  std::vector<std::size_t> mock_shape;    // mock only; empty means the mock default
  GenerationParams generation;

  /// Throws ValidationError when the fields required by `kind` are missing.
  void validate() const;
};

/// Objective bundled with whatever backend it needs to stay alive.
struct OwnedObjective {
  std::shared_ptr<Backend> backend;
  std::unique_ptr<Objective> objective;
};

OwnedObjective make_objective(const ObjectiveSpec& spec);

/// One-shot evaluation of `z` under `spec`; wall time of the call is recorded in the scores.
Evaluation evaluate(const ObjectiveSpec& spec, std::span<const double> z);

}  // namespace embopt
