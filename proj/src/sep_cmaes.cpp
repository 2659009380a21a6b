#include "embopt/sep_cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "embopt/error.hpp"

namespace embopt {

namespace {

double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

double SepCmaParams::c_1_sep() const {
  const double c1 = c_1 * sep_boost;
  const double cmu = c_mu * sep_boost;
  return c1 + cmu > 1.0 ? c1 / (c1 + cmu) : c1;
}

double SepCmaParams::c_mu_sep() const {
  const double c1 = c_1 * sep_boost;
  const double cmu = c_mu * sep_boost;
  return c1 + cmu > 1.0 ? cmu / (c1 + cmu) : cmu;
}

SepCmaParams SepCmaParams::defaults(std::size_t dimension, std::size_t lambda) {
  if (dimension == 0) throw ValidationError("sep-cmaes: dimension must be >= 1");
  if (lambda < 2) throw ValidationError("sep-cmaes: lambda must be >= 2");

  SepCmaParams p;
  p.dimension = dimension;
  p.lambda = lambda;
  p.mu = lambda / 2;

  const double d = static_cast<double>(dimension);
  const double log_mu_half = std::log(static_cast<double>(p.mu) + 0.5);
  p.weights.resize(p.mu);
  for (std::size_t i = 0; i < p.mu; ++i) p.weights[i] = log_mu_half - std::log(static_cast<double>(i + 1));
  const double wsum = std::accumulate(p.weights.begin(), p.weights.end(), 0.0);
  for (auto& w : p.weights) w /= wsum;
  p.mu_eff = 1.0 / squared_norm(p.weights);

  const double mueff = p.mu_eff;
  p.c_sigma = (mueff + 2.0) / (d + mueff + 5.0);
  p.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((mueff - 1.0) / (d + 1.0)) - 1.0) + p.c_sigma;
  p.c_c = (4.0 + mueff / d) / (d + 4.0 + 2.0 * mueff / d);
  p.c_1 = 2.0 / ((d + 1.3) * (d + 1.3) + mueff);
  p.c_mu = std::min(1.0 - p.c_1, 2.0 * (mueff - 2.0 + 1.0 / mueff) / ((d + 2.0) * (d + 2.0) + mueff));
  p.sep_boost = (d + 2.0) / 3.0;
  p.chi_d = std::sqrt(d) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d));
  return p;
}

std::vector<std::size_t> SepCmaState::array_lengths() const {
  return {mean.size(), diag_c.size(), p_sigma.size(), p_c.size()};
}

SepCmaes::SepCmaes(const EmbeddingVector& m0, double sigma0, std::size_t lambda, RngSeed seed)
    : shape_(m0.shape()), rng_(seed) {
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) throw ValidationError("sep-cmaes: sigma0 must be positive");
  params_ = SepCmaParams::defaults(m0.size(), lambda);
  const std::size_t d = m0.size();
  state_.mean = m0.data();
  state_.sigma = sigma0;
  state_.diag_c.assign(d, 1.0);
  state_.p_sigma.assign(d, 0.0);
  state_.p_c.assign(d, 0.0);
  state_.generation = 0;
}

EmbeddingVector SepCmaes::mean() const { return EmbeddingVector(state_.mean, shape_); }

SepCmaSample SepCmaes::ask() {
  const std::size_t d = params_.dimension;
  SepCmaSample sample;
  sample.candidates.reserve(params_.lambda);
  sample.steps.reserve(params_.lambda);

  std::vector<double> stddev(d);
  for (std::size_t j = 0; j < d; ++j) stddev[j] = std::sqrt(state_.diag_c[j]);

  for (std::size_t i = 0; i < params_.lambda; ++i) {
    std::vector<double> y(d);
    std::vector<double> x(d);
    for (std::size_t j = 0; j < d; ++j) {
      y[j] = stddev[j] * rng_.normal();
      x[j] = state_.mean[j] + state_.sigma * y[j];
    }
    sample.candidates.emplace_back(std::move(x), shape_);
    sample.steps.push_back(std::move(y));
  }
  return sample;
}

void SepCmaes::tell(const SepCmaSample& sample, std::span<const double> fitness) {
  const std::size_t d = params_.dimension;
  const std::size_t lambda = params_.lambda;
  if (fitness.size() != lambda || sample.steps.size() != lambda || sample.candidates.size() != lambda) {
    throw ValidationError("sep-cmaes tell: expected exactly lambda candidates and fitness values");
  }
  require_finite(fitness, "sep-cmaes tell fitness");
  for (const auto& y : sample.steps) {
    if (y.size() != d) throw ValidationError("sep-cmaes tell: step length mismatch");
  }

  std::vector<std::size_t> order(lambda);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t lhs, std::size_t rhs) { return fitness[lhs] > fitness[rhs]; });

  if (!best_candidate_ || fitness[order[0]] > best_fitness_) {
    best_candidate_ = sample.candidates[order[0]];
    best_fitness_ = fitness[order[0]];
  }

  const auto& p = params_;
  // Weighted mean of the selected steps, in y-space.
  std::vector<double> y_w(d, 0.0);
  for (std::size_t k = 0; k < p.mu; ++k) {
    const auto& y = sample.steps[order[k]];
    const double w = p.weights[k];
    for (std::size_t j = 0; j < d; ++j) y_w[j] += w * y[j];
  }

  auto& s = state_;
  for (std::size_t j = 0; j < d; ++j) s.mean[j] += s.sigma * y_w[j];

  const double ps_coeff = std::sqrt(p.c_sigma * (2.0 - p.c_sigma) * p.mu_eff);
  for (std::size_t j = 0; j < d; ++j) {
    s.p_sigma[j] = (1.0 - p.c_sigma) * s.p_sigma[j] + ps_coeff * y_w[j] / std::sqrt(s.diag_c[j]);
  }
  const double ps_norm = std::sqrt(squared_norm(s.p_sigma));

  const double t1 = static_cast<double>(s.generation + 1);
  const double ps_unbiased = ps_norm / std::sqrt(1.0 - std::pow(1.0 - p.c_sigma, 2.0 * t1));
  const double dim = static_cast<double>(d);
  const bool h_sigma = ps_unbiased < (1.4 + 2.0 / (dim + 1.0)) * p.chi_d;

  const double pc_coeff = h_sigma ? std::sqrt(p.c_c * (2.0 - p.c_c) * p.mu_eff) : 0.0;
  for (std::size_t j = 0; j < d; ++j) s.p_c[j] = (1.0 - p.c_c) * s.p_c[j] + pc_coeff * y_w[j];

  const double c1 = p.c_1_sep();
  const double cmu = p.c_mu_sep();
  const double stall_fix = h_sigma ? 0.0 : p.c_c * (2.0 - p.c_c);
  for (std::size_t j = 0; j < d; ++j) {
    double rank_mu = 0.0;
    for (std::size_t k = 0; k < p.mu; ++k) {
      const double y = sample.steps[order[k]][j];
      rank_mu += p.weights[k] * y * y;
    }
    const double old_c = s.diag_c[j];
    s.diag_c[j] = (1.0 - c1 - cmu) * old_c + c1 * (s.p_c[j] * s.p_c[j] + stall_fix * old_c) + cmu * rank_mu;
  }

  s.sigma *= std::exp((p.c_sigma / p.d_sigma) * (ps_norm / p.chi_d - 1.0));
  ++s.generation;
}

RunResult run_sep_cmaes(Objective& objective, const EmbeddingVector& m0, const SepCmaRunConfig& config,
                        const Clock& clock, const IterationObserver& observer) {
  if (config.generations < 1) throw ValidationError("sep-cmaes run: generations must be >= 1");
  if (objective.dimension() != m0.size()) throw ValidationError("sep-cmaes run: objective dimension mismatch");

  SepCmaes es(m0, config.sigma0, config.lambda, config.seed);
  RunResult result;
  result.trace.optimizer_id = "sep-cmaes";
  result.trace.entries.reserve(config.generations);
  std::size_t evaluations = 0;

  for (std::size_t t = 0; t < config.generations; ++t) {
    auto sample = es.ask();
    std::vector<double> fitness(sample.candidates.size());
    std::size_t gen_best = 0;
    const EmbeddingVector* improved = nullptr;
    try {
      std::vector<Evaluation> evals;
      evals.reserve(sample.candidates.size());
      for (const auto& x : sample.candidates) {
        evals.push_back(objective.evaluate(x.view()));
        ++evaluations;
      }
      for (std::size_t i = 0; i < evals.size(); ++i) {
        fitness[i] = evals[i].fitness.value;
        if (fitness[i] > fitness[gen_best]) gen_best = i;
      }
      es.tell(sample, fitness);
      if (!result.best || fitness[gen_best] > result.best->evaluation.fitness.value) {
        result.best = BestSeen{sample.candidates[gen_best], evals[gen_best]};
        improved = &result.best->embedding;
      }
    } catch (const std::exception& e) {
      result.completed = false;
      result.error = e.what();
      break;
    }

    TraceEntry entry;
    entry.iteration = t + 1;
    entry.evaluations = evaluations;
    entry.wall_seconds = clock.now();
    entry.best_fitness = result.best->evaluation.fitness.value;
    entry.best_scores = result.best->evaluation.scores;
    entry.fitness = fitness[gen_best];
    entry.loss = loss(entry.fitness);
    result.trace.entries.push_back(entry);
    if (observer) observer(entry, improved);
  }
  result.final_point = es.mean();
  return result;
}

}  // namespace embopt
