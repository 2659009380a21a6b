#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "embopt/clock.hpp"
#include "embopt/embedding.hpp"
#include "embopt/objective.hpp"
#include "embopt/random.hpp"
#include "embopt/trace.hpp"

namespace embopt {

/// Strategy constants of separable CMA-ES, derived from dimension and population size.
struct SepCmaParams {
  std::size_t dimension = 0;
  std::size_t lambda = 0;
  std::size_t mu = 0;
  std::vector<double> weights;  // positive, descending, sum 1
  double mu_eff = 0.0;
  double c_sigma = 0.0;
  double d_sigma = 0.0;
  double c_c = 0.0;
  double c_1 = 0.0;   // full-covariance rate, before the separable boost
  double c_mu = 0.0;  // full-covariance rate, before the separable boost
  double sep_boost = 0.0;
  double chi_d = 0.0;

  /// Rates actually applied to the diagonal. Their sum never exceeds 1.
  double c_1_sep() const;
  double c_mu_sep() const;

  static SepCmaParams defaults(std::size_t dimension, std::size_t lambda);
};

/// The adapted distribution. Exactly four d-length arrays plus scalars.
struct SepCmaState {
  std::vector<double> mean;
  double sigma = 0.0;
  std::vector<double> diag_c;
  std::vector<double> p_sigma;
  std::vector<double> p_c;
  std::size_t generation = 0;

  /// Lengths of every array the state owns, for memory accounting.
  std::vector<std::size_t> array_lengths() const;
};

/// Output of ask(): candidates x_i = m + sigma * y_i and the raw steps y_i = sqrt(c) * n_i.
struct SepCmaSample {
  std::vector<EmbeddingVector> candidates;
  std::vector<std::vector<double>> steps;
};

/// Ask/tell separable CMA-ES. Maximizes.
class SepCmaes {
 public:
  /// Throws ValidationError if sigma0 <= 0 or lambda < 2.
  SepCmaes(const EmbeddingVector& m0, double sigma0, std::size_t lambda, RngSeed seed);

  const SepCmaParams& params() const noexcept { return params_; }
  const SepCmaState& state() const noexcept { return state_; }
  /// Direct state access, mainly for tests that need a hand-built distribution.
  SepCmaState& mutable_state() noexcept { return state_; }

  SepCmaSample ask();

  /// Rank the sample by descending fitness (ties: lower index first) and update
  /// mean, paths, diagonal covariance, and step size.
  /// Throws ValidationError on a count mismatch or a non-finite fitness.
  void tell(const SepCmaSample& sample, std::span<const double> fitness);

  /// Mean as an embedding with the shape of m0.
  EmbeddingVector mean() const;
  /// Best candidate passed to tell() so far; empty before the first tell.
  const std::optional<EmbeddingVector>& best_candidate() const noexcept { return best_candidate_; }
  double best_fitness() const noexcept { return best_fitness_; }

 private:
  SepCmaParams params_;
  SepCmaState state_;
  std::vector<std::size_t> shape_;
  Rng rng_;
  std::optional<EmbeddingVector> best_candidate_;
  double best_fitness_ = 0.0;
};

struct SepCmaRunConfig {
  double sigma0 = 0.5;
  std::size_t lambda = 20;
  std::size_t generations = 100;
  RngSeed seed{};
};

/// T ask/evaluate/tell cycles. best is the best candidate over all evaluations,
/// final_point is the last mean. An objective failure stops the run and keeps the
/// partial trace (completed = false).
RunResult run_sep_cmaes(Objective& objective, const EmbeddingVector& m0, const SepCmaRunConfig& config,
                        const Clock& clock, const IterationObserver& observer = {});

}  // namespace embopt
