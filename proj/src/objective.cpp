#include "embopt/objective.hpp"

#include <chrono>
#include <cmath>

#include "embopt/backend.hpp"
#include "embopt/error.hpp"
#include "embopt/fitness.hpp"
#include "embopt/http_backend.hpp"
#include "embopt/mock_backend.hpp"

namespace embopt {

std::vector<double> Objective::fitness_gradient(std::span<const double>) {
  throw ValidationError("objective has no analytic gradient");
}

namespace {

struct Moments {
  double dist2 = 0.0;  // |z - z*|^2
  double dot = 0.0;
  double norm_z = 0.0;
  double norm_t = 0.0;
};

Moments moments(std::span<const double> z, std::span<const double> target) {
  if (z.size() != target.size()) throw ValidationError("synthetic objective: dimension mismatch");
  if (z.empty()) throw ValidationError("synthetic objective: empty vectors");
  Moments m;
  double zz = 0.0;
  double tt = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double diff = z[j] - target[j];
    m.dist2 += diff * diff;
    m.dot += z[j] * target[j];
    zz += z[j] * z[j];
    tt += target[j] * target[j];
  }
  m.norm_z = std::sqrt(zz);
  m.norm_t = std::sqrt(tt);
  return m;
}

}  // namespace

MetricScores synthetic_scores(std::span<const double> z, std::span<const double> target) {
  const auto m = moments(z, target);
  const double d = static_cast<double>(z.size());
  MetricScores s;
  s.aesthetic = 1.0 + 9.0 * std::exp(-m.dist2 / (2.0 * d));
  if (m.norm_z == 0.0 || m.norm_t == 0.0) {
    s.clip = 0.0;
  } else {
    s.clip = std::fmax(-1.0, std::fmin(1.0, m.dot / (m.norm_z * m.norm_t)));
  }
  return s;
}

std::vector<double> synthetic_gradient(std::span<const double> z, std::span<const double> target,
                                       const FitnessConfig& cfg) {
  cfg.validate();
  const auto m = moments(z, target);
  const double d = static_cast<double>(z.size());
  std::vector<double> grad(z.size(), 0.0);

  if (cfg.a > 0.0) {
    // d/dz [9 exp(-|z - z*|^2 / 2d)] = -9 exp(.) (z - z*) / d
    const double k = -(cfg.a / cfg.aesthetic_divisor) * 9.0 * std::exp(-m.dist2 / (2.0 * d)) / d;
    for (std::size_t j = 0; j < z.size(); ++j) grad[j] += k * (z[j] - target[j]);
  }
  if (cfg.b > 0.0) {
    if (m.norm_z == 0.0) throw DomainError("synthetic gradient: cosine term undefined at z = 0");
    if (m.norm_t > 0.0) {
      // d cos / dz = z* / (|z||z*|) - cos * z / |z|^2
      const double w = cfg.b / cfg.clip_divisor;
      const double inv = 1.0 / (m.norm_z * m.norm_t);
      const double cos = m.dot * inv;
      const double inv_zz = 1.0 / (m.norm_z * m.norm_z);
      for (std::size_t j = 0; j < z.size(); ++j) grad[j] += w * (target[j] * inv - cos * z[j] * inv_zz);
    }
  }
  return grad;
}

SyntheticObjective::SyntheticObjective(std::vector<double> target, FitnessConfig cfg)
    : target_(std::move(target)), cfg_(cfg) {
  cfg_.validate();
  if (target_.empty()) throw ValidationError("synthetic objective: empty target");
  require_finite(target_, "synthetic target");
}

Evaluation SyntheticObjective::evaluate(std::span<const double> z) {
  Evaluation e;
  e.scores = synthetic_scores(z, target_);
  e.fitness = fitness(e.scores, cfg_);
  return e;
}

std::vector<double> SyntheticObjective::fitness_gradient(std::span<const double> z) {
  return synthetic_gradient(z, target_, cfg_);
}

BackendObjective::BackendObjective(Backend& backend, std::string prompt, std::vector<std::size_t> shape,
                                   FitnessConfig cfg, GenerationParams params)
    : backend_(backend), prompt_(std::move(prompt)), shape_(std::move(shape)), cfg_(cfg), params_(params) {
  cfg_.validate();
  if (shape_product(shape_) == 0) throw ValidationError("backend objective: empty shape");
}

std::size_t BackendObjective::dimension() const { return shape_product(shape_); }

Evaluation BackendObjective::evaluate(std::span<const double> z) {
  GenerationRequest req;
  req.prompt = prompt_;
  req.embedding = EmbeddingVector(std::vector<double>(z.begin(), z.end()), shape_);
  req.seed = params_.seed;
  req.inference_steps = params_.inference_steps;
  req.guidance_scale = params_.guidance_scale;
  req.width = params_.width;
  req.height = params_.height;

  const auto start = std::chrono::steady_clock::now();
  const auto resp = backend_.generate_and_score(req);
  Evaluation e;
  e.scores.aesthetic = resp.aesthetic;
  e.scores.clip = resp.clip;
  e.scores.eval_wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  e.fitness = fitness(e.scores, cfg_);
  return e;
}

Evaluation ClockedObjective::evaluate(std::span<const double> z) {
  auto e = inner_.evaluate(z);
  clock_.advance(cost_);
  e.scores.eval_wall_time = cost_;
  return e;
}

std::vector<double> ClockedObjective::fitness_gradient(std::span<const double> z) {
  return inner_.fitness_gradient(z);
}

void ObjectiveSpec::validate() const {
  fitness_config.validate();
  switch (kind) {
    case ObjectiveKind::synthetic:
      if (!target) throw ValidationError("objective spec: synthetic kind requires a target");
      break;
    case ObjectiveKind::remote_backend:
      if (endpoint.empty()) throw ValidationError("objective spec: remote kind requires an endpoint");
      [[fallthrough]];
    case ObjectiveKind::mock_backend:
      if (prompt.empty()) throw ValidationError("objective spec: backend kinds require a prompt");
      break;
  }
}

OwnedObjective make_objective(const ObjectiveSpec& spec) {
  spec.validate();
  OwnedObjective out;
  switch (spec.kind) {
    case ObjectiveKind::synthetic:
      out.objective = std::make_unique<SyntheticObjective>(spec.target->data(), spec.fitness_config);
      return out;
    case ObjectiveKind::mock_backend: {
      MockBackendConfig mc;
      if (!spec.mock_shape.empty()) mc.shape = spec.mock_shape;
      auto backend = std::make_shared<MockBackend>(mc);
      out.objective = std::make_unique<BackendObjective>(*backend, spec.prompt, mc.shape, spec.fitness_config,
                                                         spec.generation);
      out.backend = std::move(backend);
      return out;
    }
    case ObjectiveKind::remote_backend: {
      auto backend = std::make_shared<HttpBackend>(HttpBackendConfig{spec.endpoint});
      const auto shape = backend->health().embedding_shape;
      out.objective =
          std::make_unique<BackendObjective>(*backend, spec.prompt, shape, spec.fitness_config, spec.generation);
      out.backend = std::move(backend);
      return out;
    }
  }
  throw ValidationError("objective spec: unknown kind");
}

Evaluation evaluate(const ObjectiveSpec& spec, std::span<const double> z) {
  auto owned = make_objective(spec);
  return owned.objective->evaluate(z);
}

}  // namespace embopt
