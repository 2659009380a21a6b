#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "embopt/adam.hpp"
#include "embopt/aggregate.hpp"
#include "embopt/backend.hpp"
#include "embopt/objective.hpp"
#include "embopt/sep_cmaes.hpp"
#include "embopt/trace.hpp"

namespace embopt {

struct Prompt {
  std::string id;    // "p01", "p02", ...
  std::string text;
};

/// One prompt per line; blank lines and lines starting with '#' are skipped.
std::vector<Prompt> parse_prompt_list(const std::string& text);
std::vector<Prompt> read_prompt_file(const std::string& path);

/// How Adam's run length is matched to sep-CMA-ES.
enum class BudgetMode {
  generations,  // Adam runs exactly adam_iterations steps
  evaluations,  // Adam gets as many steps as fit in the evaluation budget
  wall_seconds  // Adam runs adam_iterations steps, then its trace is clipped to the time budget
};

const char* to_string(BudgetMode mode);
BudgetMode parse_budget_mode(const std::string& text);

struct BudgetPolicy {
  BudgetMode mode = BudgetMode::evaluations;
  /// Explicit budget (evaluations or seconds). When empty the budget is taken from the
  /// sep-CMA-ES runs: lambda * generations evaluations, or their mean wall time.
  std::optional<double> value;
};

struct ExperimentConfig {
  FitnessConfig fitness;
  bool use_sep_cmaes = true;
  bool use_adam = true;
  SepCmaRunConfig sep_cmaes;  // seed is ignored; per-prompt seeds derive from `seed`
  AdamConfig adam;
  std::size_t adam_iterations = 100;
  BudgetPolicy budget;
  std::uint64_t seed = 1;
  GenerationParams generation;
  /// Virtual time makes traces reproducible; each evaluation then costs seconds_per_evaluation.
  bool virtual_clock = true;
  double seconds_per_evaluation = 0.45;
  bool compute_similarity = true;
  std::size_t parallel_prompts = 1;

  void validate() const;
  std::vector<std::string> optimizer_ids() const;
};

struct OptimizerOutcome {
  std::string optimizer;
  RunTrace trace;       // as produced by the optimizer
  RunTrace effective;   // after the budget policy; what the report uses
  EmbeddingVector final_embedding;
  Evaluation final_evaluation;  // baseline when the effective trace is empty
  std::optional<double> cosine_distance;
  std::optional<double> ssim;
  bool failed = false;
  std::string error;
};

struct PromptRecord {
  Prompt prompt;
  bool failed = false;
  std::string error;
  EmbeddingVector initial;
  Evaluation baseline;
  std::vector<OptimizerOutcome> outcomes;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<std::size_t> embedding_shape;
  std::string backend_kind;
  std::vector<PromptRecord> prompts;
  std::optional<double> resolved_adam_budget;
  bool any_failed = false;
};

/// Per prompt: encode, evaluate the unoptimized baseline, run each optimizer from the same
/// initial embedding, apply the budget policy, and measure image similarity to the baseline.
/// A backend failure marks the prompt failed; the experiment carries on.
ExperimentResult run_experiment(Backend& backend, const std::vector<Prompt>& prompts,
                                const ExperimentConfig& config);

/// Seed of the sep-CMA-ES run for prompt `index`.
RngSeed prompt_seed(std::uint64_t run_seed, std::size_t index);

/// Baseline and final records of the non-failed prompts, ready for aggregate().
std::vector<FinalRecord> baseline_records(const ExperimentResult& result);
std::vector<FinalRecord> final_records(const ExperimentResult& result);

}  // namespace embopt
