#include "embopt/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "embopt/error.hpp"

namespace embopt {

namespace {

template <typename Keep>
RunTrace clip_prefix(const RunTrace& trace, Keep keep) {
  RunTrace out{trace.prompt_id, trace.optimizer_id, {}};
  for (const auto& e : trace.entries) {
    if (!keep(e)) break;
    out.entries.push_back(e);
  }
  for (std::size_t i = 1; i < out.entries.size(); ++i) {
    auto& prev = out.entries[i - 1];
    auto& cur = out.entries[i];
    if (prev.best_fitness > cur.best_fitness) {
      cur.best_fitness = prev.best_fitness;
      cur.best_scores = prev.best_scores;
    }
  }
  return out;
}

}  // namespace

RunTrace clip_trace_to_budget(const RunTrace& trace, double budget_seconds) {
  if (!(budget_seconds >= 0.0)) throw ValidationError("clip_trace_to_budget: budget must be >= 0");
  return clip_prefix(trace, [&](const TraceEntry& e) { return e.wall_seconds <= budget_seconds; });
}

RunTrace clip_trace_to_evaluations(const RunTrace& trace, std::size_t max_evaluations) {
  return clip_prefix(trace, [&](const TraceEntry& e) { return e.evaluations <= max_evaluations; });
}

double percent_change(double baseline, double value) {
  if (baseline == 0.0) throw DomainError("percent_change: zero baseline");
  return 100.0 * (value - baseline) / baseline;
}

SummaryStats summarize(std::span<const double> values) {
  SummaryStats s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

WinCount count_wins(const std::vector<std::vector<double>>& best) {
  WinCount out;
  if (best.empty()) return out;
  const std::size_t k = best.front().size();
  out.wins.assign(k, 0);
  for (std::size_t p = 0; p < best.size(); ++p) {
    if (best[p].size() != k) throw ValidationError("count_wins: every optimizer needs a value for every prompt");
    if (k == 0) continue;
    const double top = *std::max_element(best[p].begin(), best[p].end());
    const auto holders = std::count(best[p].begin(), best[p].end(), top);
    if (holders > 1) {
      out.tied_prompts.push_back(p);
    } else {
      const auto winner = std::find(best[p].begin(), best[p].end(), top) - best[p].begin();
      ++out.wins[static_cast<std::size_t>(winner)];
    }
  }
  return out;
}

namespace {

MetricColumn column(const std::vector<double>& values, double baseline_mean) {
  const auto s = summarize(values);
  MetricColumn c{s.mean, s.stddev, 0.0};
  c.delta_pct = baseline_mean == 0.0 ? 0.0 : percent_change(baseline_mean, s.mean);
  return c;
}

}  // namespace

AggregateReport aggregate(const std::vector<FinalRecord>& baseline, const std::vector<FinalRecord>& finals,
                          const std::vector<std::string>& optimizer_order, const FitnessConfig& cfg) {
  AggregateReport report;
  report.prompts = baseline.size();

  std::vector<double> base_aest, base_clip, base_fit;
  for (const auto& r : baseline) {
    base_aest.push_back(r.scores.aesthetic);
    base_clip.push_back(r.scores.clip);
    base_fit.push_back(r.fitness);
  }
  const double ba = summarize(base_aest).mean;
  const double bc = summarize(base_clip).mean;
  const double bf = summarize(base_fit).mean;

  AggregateRow base_row{"baseline", cfg.a, cfg.b, column(base_aest, ba), column(base_clip, bc),
                        column(base_fit, bf), 0};
  report.rows.push_back(base_row);

  // (prompt, optimizer) -> record
  std::map<std::pair<std::string, std::string>, const FinalRecord*> index;
  for (const auto& r : finals) index[{r.prompt_id, r.optimizer}] = &r;

  std::vector<std::vector<double>> best(baseline.size(), std::vector<double>(optimizer_order.size()));
  for (std::size_t k = 0; k < optimizer_order.size(); ++k) {
    std::vector<double> aest, clip, fit;
    for (std::size_t p = 0; p < baseline.size(); ++p) {
      auto it = index.find({baseline[p].prompt_id, optimizer_order[k]});
      if (it == index.end()) {
        throw ValidationError("aggregate: missing record for prompt " + baseline[p].prompt_id + " and optimizer " +
                              optimizer_order[k]);
      }
      aest.push_back(it->second->scores.aesthetic);
      clip.push_back(it->second->scores.clip);
      fit.push_back(it->second->fitness);
      best[p][k] = it->second->fitness;
    }
    report.rows.push_back(
        AggregateRow{optimizer_order[k], cfg.a, cfg.b, column(aest, ba), column(clip, bc), column(fit, bf), 0});
  }
  report.wins = count_wins(best);
  for (std::size_t k = 0; k < optimizer_order.size() && !report.wins.wins.empty(); ++k) {
    report.rows[k + 1].wins = report.wins.wins[k];
  }
  return report;
}

std::vector<MeanTracePoint> mean_trace(const std::vector<RunTrace>& traces) {
  std::size_t longest = 0;
  for (const auto& t : traces) longest = std::max(longest, t.entries.size());
  std::vector<MeanTracePoint> out;
  for (std::size_t i = 0; i < longest; ++i) {
    MeanTracePoint pt;
    pt.iteration = i + 1;
    for (const auto& t : traces) {
      if (i >= t.entries.size()) continue;
      ++pt.prompts;
      pt.mean_best_fitness += t.entries[i].best_fitness;
      pt.mean_evaluations += static_cast<double>(t.entries[i].evaluations);
      pt.mean_wall_seconds += t.entries[i].wall_seconds;
    }
    const double n = static_cast<double>(pt.prompts);
    pt.mean_best_fitness /= n;
    pt.mean_evaluations /= n;
    pt.mean_wall_seconds /= n;
    out.push_back(pt);
  }
  return out;
}

}  // namespace embopt
