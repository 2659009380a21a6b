#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "embopt/harness.hpp"

namespace embopt::cli {

enum ExitCode : int {
  kSuccess = 0,
  kPartialFailure = 1,
  kConfigError = 2,
  kBackendUnreachable = 3,
};

/// Everything `optimize` needs. Defaults mirror the published experiment parameters.
struct RunConfig {
  std::string backend = "mock";  // "mock" or an http:// endpoint
  std::string preset = "balanced";
  std::optional<double> a;
  std::optional<double> b;
  double aesthetic_divisor = 10.0;
  double clip_divisor = 0.5;
  std::string optimizer = "both";  // sep-cmaes | adam | both
  std::size_t generations = 100;
  std::size_t lambda = 20;
  double sigma = 0.5;
  double learning_rate = 5e-3;
  double beta1 = 0.85;
  double beta2 = 0.98;
  double epsilon = 1e-8;
  double weight_decay = 1e-5;
  std::string decay = "decoupled";
  double fd_step = 1e-3;
  std::size_t adam_iterations = 100;
  std::string budget_mode = "evaluations";
  std::optional<double> budget;
  std::uint64_t seed = 1;
  std::string out = "runs/latest";
  std::string prompts = "prompts/parti36.txt";
  std::vector<std::size_t> mock_shape{4, 64};
  std::size_t parallel_prompts = 1;
  std::string clock = "auto";  // auto | virtual | real
  double seconds_per_evaluation = 0.45;
  bool similarity = true;

  /// (a, b) after applying the preset and any explicit overrides.
  FitnessConfig fitness() const;
  /// Throws ValidationError on any inconsistent field.
  ExperimentConfig experiment() const;
};

/// Named weightings: aesthetic (1,0), balanced (0.5,0.5), alignment (0,1).
std::pair<double, double> preset_weights(const std::string& name);

/// Entry point of the `embopt` tool. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace embopt::cli
