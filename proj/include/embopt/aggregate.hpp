#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "embopt/trace.hpp"
#include "embopt/types.hpp"

namespace embopt {

/// Keep the entries with wall_seconds <= budget; best-so-far is recomputed over the kept prefix.
RunTrace clip_trace_to_budget(const RunTrace& trace, double budget_seconds);
/// Same, keyed on cumulative evaluations.
RunTrace clip_trace_to_evaluations(const RunTrace& trace, std::size_t max_evaluations);

/// 100 * (value - baseline) / baseline. Throws DomainError for a zero baseline.
double percent_change(double baseline, double value);

struct SummaryStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n - 1); 0 when n == 1
};
SummaryStats summarize(std::span<const double> values);

struct WinCount {
  std::vector<std::size_t> wins;  // per optimizer
  std::vector<std::size_t> tied_prompts;
};

/// best[p][k] is optimizer k's best fitness on prompt p. The strictly greatest value on a
/// prompt scores a win; exact ties for the top score no win and list the prompt.
WinCount count_wins(const std::vector<std::vector<double>>& best);

struct MetricColumn {
  double mean = 0.0;
  double stddev = 0.0;
  double delta_pct = 0.0;
};

struct AggregateRow {
  std::string optimizer;
  double a = 0.0;
  double b = 0.0;
  MetricColumn aesthetic;
  MetricColumn clip;
  MetricColumn fitness;
  std::size_t wins = 0;
};

/// Final outcome of one optimizer (or the baseline) on one prompt.
struct FinalRecord {
  std::string prompt_id;
  std::string optimizer;
  MetricScores scores;
  double fitness = 0.0;
};

struct AggregateReport {
  std::vector<AggregateRow> rows;  // baseline first, then optimizers in the given order
  WinCount wins;
  std::size_t prompts = 0;
};

/// Table-style summary: mean and sample std across prompts, percent change of each mean
/// against the baseline mean, and wins among the optimizers (the baseline never competes).
/// Every optimizer needs a record for every baseline prompt.
AggregateReport aggregate(const std::vector<FinalRecord>& baseline, const std::vector<FinalRecord>& finals,
                          const std::vector<std::string>& optimizer_order, const FitnessConfig& cfg);

struct MeanTracePoint {
  std::size_t iteration = 0;
  std::size_t prompts = 0;  // traces that reach this iteration
  double mean_best_fitness = 0.0;
  double mean_evaluations = 0.0;
  double mean_wall_seconds = 0.0;
};

/// Per-iteration mean of best-so-far fitness across prompts.
std::vector<MeanTracePoint> mean_trace(const std::vector<RunTrace>& traces);

}  // namespace embopt
