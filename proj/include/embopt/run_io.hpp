#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "embopt/aggregate.hpp"
#include "embopt/harness.hpp"

namespace embopt {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kRunFormat = "embopt-run/1";

/// CSV header: iteration,evals,wall_s,best_fitness,best_aesthetic,best_clip
void write_trace_csv(std::ostream& out, const RunTrace& trace);
/// Reads what write_trace_csv wrote. Fitness-only fields (fitness, loss) are not stored and come back as 0.
RunTrace read_trace_csv(std::istream& in, const std::string& prompt_id, const std::string& optimizer_id);

/// Table-style report with the fixed rounding (2 decimals for aesthetic and percentages,
/// 4 for clip and fitness).
std::string format_report_csv(const AggregateReport& report);
/// One line per prompt naming the winner, or "tie".
std::string format_wins_csv(const std::vector<std::string>& prompt_ids, const std::vector<std::string>& optimizers,
                            const WinCount& wins, const std::vector<std::vector<double>>& best);
std::string format_mean_trace_csv(const std::vector<MeanTracePoint>& points);

/// Whatever the CLI knew about the run besides the experiment itself.
struct RunMetadata {
  std::string backend;      // "mock" or the endpoint URL
  std::string prompt_file;
  nlohmann::json extra = nlohmann::json::object();
};

nlohmann::json make_manifest(const ExperimentResult& result, const RunMetadata& meta);

/// Writes manifest.json, baseline.csv, finals.csv, traces/, candidates/, similarity.csv,
/// mean_trace_<optimizer>.csv, report.csv and wins.csv.
void write_run_directory(const std::filesystem::path& dir, const ExperimentResult& result, const RunMetadata& meta);

/// A run directory loaded back from disk.
struct RunDirectory {
  std::filesystem::path path;
  nlohmann::json manifest;
  std::vector<Prompt> prompts;         // every prompt in the run, failed or not
  std::vector<std::string> failed;     // prompt ids
  FitnessConfig fitness;
  std::vector<std::string> optimizers;
  std::vector<FinalRecord> baseline;   // non-failed prompts only
  std::vector<FinalRecord> finals;
  std::map<std::pair<std::string, std::string>, RunTrace> traces;  // raw traces by (prompt, optimizer)
  std::map<std::pair<std::string, std::string>, double> final_wall_seconds;
  std::map<std::pair<std::string, std::string>, double> final_evaluations;
};

RunDirectory read_run_directory(const std::filesystem::path& dir);

/// Recomputes report.csv and wins.csv from the files in `run` and writes them into its directory.
AggregateReport rewrite_report(const RunDirectory& run);

struct ComparisonRow {
  AggregateRow row;
  double aesthetic_delta_ref_pct = 0.0;
  double clip_delta_ref_pct = 0.0;
  double fitness_delta_ref_pct = 0.0;
};

struct Comparison {
  std::vector<std::string> labels;  // one per competing (run, optimizer)
  std::vector<ComparisonRow> rows;  // baseline first
  AggregateReport report;
  std::optional<double> clip_budget;
};

/// Compare the final results of several runs over the same prompts and fitness config.
/// When `clipped_run` is set, that run's traces are cut to the mean budget used by the
/// first other run (wall seconds or evaluations, per `clip_mode`). Reference deltas are
/// against the first competitor.
Comparison compare_runs(const std::vector<RunDirectory>& runs, std::optional<std::size_t> clipped_run,
                        BudgetMode clip_mode);
std::string format_comparison_csv(const Comparison& comparison);

std::string format_double(double value, int decimals);

}  // namespace embopt
