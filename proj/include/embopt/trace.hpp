#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "embopt/embedding.hpp"
#include "embopt/fitness.hpp"
#include "embopt/types.hpp"

namespace embopt {

/// One objective evaluation: raw scores and the fitness derived from them.
struct Evaluation {
  MetricScores scores;
  FitnessValue fitness;
};

struct TraceEntry {
  std::size_t iteration = 0;    // 1-based generation (sep-CMA-ES) or step (Adam)
  std::size_t evaluations = 0;  // cumulative objective calls
  double wall_seconds = 0.0;
  double best_fitness = 0.0;    // best-so-far
  MetricScores best_scores;     // raw scores of the best-so-far candidate
  double fitness = 0.0;         // this iteration's own fitness (generation best / current iterate)
  double loss = 0.0;            // 1 - fitness
};

struct RunTrace {
  std::string prompt_id;
  std::string optimizer_id;
  std::vector<TraceEntry> entries;
};

struct BestSeen {
  EmbeddingVector embedding;
  Evaluation evaluation;
};

struct RunResult {
  RunTrace trace;
  std::optional<BestSeen> best;
  /// Where the optimizer ended: the final mean for sep-CMA-ES, the final iterate for Adam.
  EmbeddingVector final_point;
  bool completed = true;
  std::string error;
};

/// Called after every iteration. `improved` is non-null when the best-so-far changed
/// during that iteration and points at the new best embedding.
using IterationObserver = std::function<void(const TraceEntry&, const EmbeddingVector* improved)>;

}  // namespace embopt
