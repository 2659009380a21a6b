#include "embopt/run_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "embopt/error.hpp"

namespace embopt {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double value, int decimals) {
  char buf[64];
  if (decimals < 0) {
    std::snprintf(buf, sizeof buf, "%.17g", value);
  } else {
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    // avoid "-0.00"
    std::string s = buf;
    if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') return s.substr(1);
    return s;
  }
  return buf;
}

namespace {

std::string exact(double v) { return format_double(v, -1); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ValidationError("bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ValidationError("bad number '" + s + "'");
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << content;
}

/// Rows of a CSV file with the header checked and stripped.
std::vector<std::vector<std::string>> read_csv(const fs::path& path, const std::string& header) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != header) throw ValidationError("unexpected header in " + path.string());
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(split_csv(line));
  }
  return rows;
}

std::string trace_file_name(const std::string& prompt_id, const std::string& optimizer) {
  return prompt_id + "_" + optimizer + ".csv";
}

constexpr const char* kTraceHeader = "iteration,evals,wall_s,best_fitness,best_aesthetic,best_clip";
constexpr const char* kBaselineHeader = "prompt_id,aesthetic,clip,fitness";
constexpr const char* kFinalsHeader = "prompt_id,optimizer,iterations,evals,wall_s,aesthetic,clip,fitness";
constexpr const char* kSimilarityHeader = "prompt,optimizer,cosine_distance,ssim";

}  // namespace

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  out << kTraceHeader << '\n';
  for (const auto& e : trace.entries) {
    out << e.iteration << ',' << e.evaluations << ',' << exact(e.wall_seconds) << ',' << exact(e.best_fitness) << ','
        << exact(e.best_scores.aesthetic) << ',' << exact(e.best_scores.clip) << '\n';
  }
}

RunTrace read_trace_csv(std::istream& in, const std::string& prompt_id, const std::string& optimizer_id) {
  RunTrace trace{prompt_id, optimizer_id, {}};
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw ValidationError("trace: unexpected header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 6) throw ValidationError("trace: expected 6 columns");
    TraceEntry e;
    e.iteration = static_cast<std::size_t>(std::stoull(cells[0]));
    e.evaluations = static_cast<std::size_t>(std::stoull(cells[1]));
    e.wall_seconds = to_double(cells[2]);
    e.best_fitness = to_double(cells[3]);
    e.best_scores.aesthetic = to_double(cells[4]);
    e.best_scores.clip = to_double(cells[5]);
    trace.entries.push_back(e);
  }
  return trace;
}

std::string format_report_csv(const AggregateReport& report) {
  std::ostringstream out;
  out << "algorithm,a,b,aesthetic_avg,aesthetic_std,aesthetic_delta_pct,clip_avg,clip_std,clip_delta_pct,"
         "fitness_avg,fitness_std,fitness_delta_pct,wins\n";
  for (const auto& r : report.rows) {
    out << r.optimizer << ',' << format_double(r.a, 2) << ',' << format_double(r.b, 2) << ','
        << format_double(r.aesthetic.mean, 2) << ',' << format_double(r.aesthetic.stddev, 2) << ','
        << format_double(r.aesthetic.delta_pct, 2) << ',' << format_double(r.clip.mean, 4) << ','
        << format_double(r.clip.stddev, 4) << ',' << format_double(r.clip.delta_pct, 2) << ','
        << format_double(r.fitness.mean, 4) << ',' << format_double(r.fitness.stddev, 4) << ','
        << format_double(r.fitness.delta_pct, 2) << ',' << r.wins << '\n';
  }
  return out.str();
}

std::string format_wins_csv(const std::vector<std::string>& prompt_ids, const std::vector<std::string>& optimizers,
                            const WinCount& wins, const std::vector<std::vector<double>>& best) {
  std::set<std::size_t> tied(wins.tied_prompts.begin(), wins.tied_prompts.end());
  std::ostringstream out;
  out << "prompt_id,winner";
  for (const auto& o : optimizers) out << ',' << o;
  out << '\n';
  for (std::size_t p = 0; p < prompt_ids.size(); ++p) {
    std::string winner = "tie";
    if (!tied.count(p) && !best[p].empty()) {
      std::size_t k = 0;
      for (std::size_t j = 1; j < best[p].size(); ++j) {
        if (best[p][j] > best[p][k]) k = j;
      }
      winner = optimizers[k];
    }
    out << prompt_ids[p] << ',' << winner;
    for (double v : best[p]) out << ',' << format_double(v, 4);
    out << '\n';
  }
  return out.str();
}

std::string format_mean_trace_csv(const std::vector<MeanTracePoint>& points) {
  std::ostringstream out;
  out << "iteration,prompts,mean_evals,mean_wall_s,mean_best_fitness\n";
  for (const auto& p : points) {
    out << p.iteration << ',' << p.prompts << ',' << exact(p.mean_evaluations) << ',' << exact(p.mean_wall_seconds)
        << ',' << exact(p.mean_best_fitness) << '\n';
  }
  return out.str();
}

namespace {

json fitness_json(const FitnessConfig& f) {
  return json{{"a", f.a}, {"b", f.b}, {"aesthetic_divisor", f.aesthetic_divisor}, {"clip_divisor", f.clip_divisor}};
}

std::vector<std::vector<double>> best_matrix(const std::vector<FinalRecord>& baseline,
                                             const std::vector<FinalRecord>& finals,
                                             const std::vector<std::string>& optimizers) {
  std::map<std::pair<std::string, std::string>, double> index;
  for (const auto& r : finals) index[{r.prompt_id, r.optimizer}] = r.fitness;
  std::vector<std::vector<double>> best;
  for (const auto& b : baseline) {
    std::vector<double> row;
    for (const auto& o : optimizers) row.push_back(index.at({b.prompt_id, o}));
    best.push_back(row);
  }
  return best;
}

std::vector<std::string> prompt_ids(const std::vector<FinalRecord>& baseline) {
  std::vector<std::string> ids;
  for (const auto& b : baseline) ids.push_back(b.prompt_id);
  return ids;
}

void write_report_files(const fs::path& dir, const std::vector<FinalRecord>& baseline,
                        const std::vector<FinalRecord>& finals, const std::vector<std::string>& optimizers,
                        const FitnessConfig& cfg, AggregateReport* out_report) {
  AggregateReport report;
  if (!baseline.empty()) report = aggregate(baseline, finals, optimizers, cfg);
  write_file(dir / "report.csv", format_report_csv(report));
  write_file(dir / "wins.csv",
             format_wins_csv(prompt_ids(baseline), optimizers, report.wins, best_matrix(baseline, finals, optimizers)));
  if (out_report) *out_report = report;
}

}  // namespace

json make_manifest(const ExperimentResult& result, const RunMetadata& meta) {
  const auto& c = result.config;
  json prompts = json::array();
  for (const auto& rec : result.prompts) {
    prompts.push_back(json{{"id", rec.prompt.id},
                           {"text", rec.prompt.text},
                           {"status", rec.failed ? "failed" : "ok"},
                           {"error", rec.error}});
  }
  json m{{"format", kRunFormat},
         {"version", kVersion},
         {"seed", c.seed},
         {"backend", json{{"endpoint", meta.backend}, {"kind", result.backend_kind}}},
         {"embedding_shape", result.embedding_shape},
         {"prompt_file", meta.prompt_file},
         {"fitness", fitness_json(c.fitness)},
         {"optimizers", c.optimizer_ids()},
         {"sep_cmaes",
          json{{"generations", c.sep_cmaes.generations}, {"lambda", c.sep_cmaes.lambda}, {"sigma", c.sep_cmaes.sigma0}}},
         {"adam",
          json{{"learning_rate", c.adam.learning_rate},
               {"beta1", c.adam.beta1},
               {"beta2", c.adam.beta2},
               {"epsilon", c.adam.epsilon},
               {"weight_decay", c.adam.weight_decay},
               {"decay", c.adam.decay_mode == WeightDecayMode::decoupled ? "decoupled" : "coupled"},
               {"fd_step", c.adam.fd_step},
               {"iterations", c.adam_iterations}}},
         {"budget",
          json{{"mode", to_string(c.budget.mode)},
               {"value", c.budget.value ? json(*c.budget.value) : json(nullptr)},
               {"resolved", result.resolved_adam_budget ? json(*result.resolved_adam_budget) : json(nullptr)}}},
         {"generation",
          json{{"seed", c.generation.seed},
               {"steps", c.generation.inference_steps},
               {"guidance", c.generation.guidance_scale},
               {"width", c.generation.width},
               {"height", c.generation.height}}},
         {"clock", json{{"virtual", c.virtual_clock}, {"seconds_per_evaluation", c.seconds_per_evaluation}}},
         {"prompts", prompts},
         {"partial_failure", result.any_failed}};
  if (!meta.extra.empty()) m["extra"] = meta.extra;
  return m;
}

void write_run_directory(const fs::path& dir, const ExperimentResult& result, const RunMetadata& meta) {
  fs::create_directories(dir / "traces");
  fs::create_directories(dir / "candidates");
  write_file(dir / "manifest.json", make_manifest(result, meta).dump(2) + "\n");

  std::ostringstream baseline, finals, similarity;
  baseline << kBaselineHeader << '\n';
  finals << kFinalsHeader << '\n';
  similarity << kSimilarityHeader << '\n';
  std::map<std::string, std::vector<RunTrace>> effective_by_optimizer;

  for (const auto& rec : result.prompts) {
    for (const auto& o : rec.outcomes) {
      std::ofstream tf(dir / "traces" / trace_file_name(rec.prompt.id, o.optimizer), std::ios::binary);
      write_trace_csv(tf, o.trace);
    }
    if (rec.failed) continue;
    baseline << rec.prompt.id << ',' << exact(rec.baseline.scores.aesthetic) << ','
             << exact(rec.baseline.scores.clip) << ',' << exact(rec.baseline.fitness.value) << '\n';
    for (const auto& o : rec.outcomes) {
      const auto& e = o.effective.entries;
      finals << rec.prompt.id << ',' << o.optimizer << ',' << (e.empty() ? 0 : e.back().iteration) << ','
             << (e.empty() ? 0 : e.back().evaluations) << ',' << exact(e.empty() ? 0.0 : e.back().wall_seconds) << ','
             << exact(o.final_evaluation.scores.aesthetic) << ',' << exact(o.final_evaluation.scores.clip) << ','
             << exact(o.final_evaluation.fitness.value) << '\n';
      if (o.cosine_distance && o.ssim) {
        similarity << rec.prompt.id << ',' << o.optimizer << ',' << exact(*o.cosine_distance) << ','
                   << exact(*o.ssim) << '\n';
      }
      write_file(dir / "candidates" / (rec.prompt.id + "_" + o.optimizer + ".json"),
                 json{{"embedding", o.final_embedding.data()}, {"shape", o.final_embedding.shape()}}.dump() + "\n");
      effective_by_optimizer[o.optimizer].push_back(o.effective);
    }
  }
  write_file(dir / "baseline.csv", baseline.str());
  write_file(dir / "finals.csv", finals.str());
  write_file(dir / "similarity.csv", similarity.str());
  for (const auto& [opt, traces] : effective_by_optimizer) {
    write_file(dir / ("mean_trace_" + opt + ".csv"), format_mean_trace_csv(mean_trace(traces)));
  }
  write_report_files(dir, baseline_records(result), final_records(result), result.config.optimizer_ids(),
                     result.config.fitness, nullptr);
}

RunDirectory read_run_directory(const fs::path& dir) {
  RunDirectory run;
  run.path = dir;
  try {
    run.manifest = json::parse(read_file(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw ValidationError("manifest.json: " + std::string(e.what()));
  }
  const auto& m = run.manifest;
  if (m.value("format", "") != kRunFormat) throw ValidationError(dir.string() + " is not a run directory");
  const auto& f = m.at("fitness");
  run.fitness = FitnessConfig{f.at("a").get<double>(), f.at("b").get<double>(),
                              f.at("aesthetic_divisor").get<double>(), f.at("clip_divisor").get<double>()};
  run.optimizers = m.at("optimizers").get<std::vector<std::string>>();
  for (const auto& p : m.at("prompts")) {
    run.prompts.push_back({p.at("id").get<std::string>(), p.at("text").get<std::string>()});
    if (p.at("status").get<std::string>() != "ok") run.failed.push_back(p.at("id").get<std::string>());
  }

  for (const auto& row : read_csv(dir / "baseline.csv", kBaselineHeader)) {
    if (row.size() != 4) throw ValidationError("baseline.csv: expected 4 columns");
    run.baseline.push_back({row[0], "baseline", MetricScores{to_double(row[1]), to_double(row[2]), 0.0},
                            to_double(row[3])});
  }
  for (const auto& row : read_csv(dir / "finals.csv", kFinalsHeader)) {
    if (row.size() != 8) throw ValidationError("finals.csv: expected 8 columns");
    run.finals.push_back({row[0], row[1], MetricScores{to_double(row[5]), to_double(row[6]), 0.0}, to_double(row[7])});
    run.final_evaluations[{row[0], row[1]}] = to_double(row[3]);
    run.final_wall_seconds[{row[0], row[1]}] = to_double(row[4]);
  }
  for (const auto& b : run.baseline) {
    for (const auto& o : run.optimizers) {
      const auto path = dir / "traces" / trace_file_name(b.prompt_id, o);
      std::ifstream in(path, std::ios::binary);
      if (!in) throw ValidationError("missing trace " + path.string());
      run.traces[{b.prompt_id, o}] = read_trace_csv(in, b.prompt_id, o);
    }
  }
  return run;
}

AggregateReport rewrite_report(const RunDirectory& run) {
  AggregateReport report;
  write_report_files(run.path, run.baseline, run.finals, run.optimizers, run.fitness, &report);
  return report;
}

Comparison compare_runs(const std::vector<RunDirectory>& runs, std::optional<std::size_t> clipped_run,
                        BudgetMode clip_mode) {
  if (runs.size() < 2) throw ValidationError("compare: need at least two runs");
  if (clipped_run && *clipped_run >= runs.size()) throw ValidationError("compare: clipped run index out of range");
  if (clip_mode == BudgetMode::generations && clipped_run) {
    throw ValidationError("compare: clipping needs wall-seconds or evaluations mode");
  }
  const auto& first = runs.front();
  for (const auto& r : runs) {
    if (!(r.fitness == first.fitness)) throw ValidationError("compare: runs use different fitness configs");
    if (r.prompts.size() != first.prompts.size()) throw ValidationError("compare: runs use different prompt lists");
    for (std::size_t i = 0; i < r.prompts.size(); ++i) {
      if (r.prompts[i].text != first.prompts[i].text) throw ValidationError("compare: runs use different prompt lists");
    }
  }

  // Prompts that succeeded in every run.
  std::set<std::string> failed;
  for (const auto& r : runs) failed.insert(r.failed.begin(), r.failed.end());
  std::vector<FinalRecord> baseline;
  for (const auto& b : first.baseline) {
    if (!failed.count(b.prompt_id)) baseline.push_back(b);
  }

  Comparison cmp;
  std::optional<double> budget;
  if (clipped_run) {
    const std::size_t ref = *clipped_run == 0 ? 1 : 0;
    const auto& source =
        clip_mode == BudgetMode::wall_seconds ? runs[ref].final_wall_seconds : runs[ref].final_evaluations;
    std::vector<double> used;
    for (const auto& b : baseline) {
      for (const auto& o : runs[ref].optimizers) used.push_back(source.at({b.prompt_id, o}));
    }
    budget = summarize(used).mean;
    cmp.clip_budget = budget;
  }

  std::vector<FinalRecord> finals;
  std::set<std::string> seen;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& run = runs[k];
    for (const auto& o : run.optimizers) {
      std::string label = o;
      if (seen.count(label)) label += "@" + std::to_string(k + 1);
      seen.insert(label);
      cmp.labels.push_back(label);

      std::map<std::string, const FinalRecord*> by_prompt;
      for (const auto& r : run.finals) {
        if (r.optimizer == o) by_prompt[r.prompt_id] = &r;
      }
      std::map<std::string, const FinalRecord*> base_by_prompt;
      for (const auto& b : run.baseline) base_by_prompt[b.prompt_id] = &b;

      for (const auto& b : baseline) {
        FinalRecord rec;
        rec.prompt_id = b.prompt_id;
        rec.optimizer = label;
        if (clipped_run && *clipped_run == k) {
          const auto& trace = run.traces.at({b.prompt_id, o});
          const auto clipped = clip_mode == BudgetMode::wall_seconds
                                   ? clip_trace_to_budget(trace, *budget)
                                   : clip_trace_to_evaluations(trace, static_cast<std::size_t>(*budget));
          if (clipped.entries.empty()) {
            rec.scores = base_by_prompt.at(b.prompt_id)->scores;
            rec.fitness = base_by_prompt.at(b.prompt_id)->fitness;
          } else {
            rec.scores = clipped.entries.back().best_scores;
            rec.fitness = fitness(rec.scores, run.fitness).value;
          }
        } else {
          auto it = by_prompt.find(b.prompt_id);
          if (it == by_prompt.end()) throw ValidationError("compare: missing final record for " + b.prompt_id);
          rec.scores = it->second->scores;
          rec.fitness = it->second->fitness;
        }
        finals.push_back(rec);
      }
    }
  }

  cmp.report = aggregate(baseline, finals, cmp.labels, first.fitness);
  const auto& ref_row = cmp.report.rows.size() > 1 ? cmp.report.rows[1] : cmp.report.rows[0];
  auto rel = [](double ref, double v) { return ref == 0.0 ? 0.0 : percent_change(ref, v); };
  for (const auto& row : cmp.report.rows) {
    ComparisonRow cr{row, rel(ref_row.aesthetic.mean, row.aesthetic.mean), rel(ref_row.clip.mean, row.clip.mean),
                     rel(ref_row.fitness.mean, row.fitness.mean)};
    cmp.rows.push_back(cr);
  }
  return cmp;
}

std::string format_comparison_csv(const Comparison& comparison) {
  std::ostringstream out;
  out << "algorithm,a,b,aesthetic_avg,aesthetic_std,aesthetic_delta_pct,clip_avg,clip_std,clip_delta_pct,"
         "fitness_avg,fitness_std,fitness_delta_pct,wins,aesthetic_delta_ref_pct,clip_delta_ref_pct,"
         "fitness_delta_ref_pct\n";
  for (const auto& cr : comparison.rows) {
    const auto& r = cr.row;
    out << r.optimizer << ',' << format_double(r.a, 2) << ',' << format_double(r.b, 2) << ','
        << format_double(r.aesthetic.mean, 2) << ',' << format_double(r.aesthetic.stddev, 2) << ','
        << format_double(r.aesthetic.delta_pct, 2) << ',' << format_double(r.clip.mean, 4) << ','
        << format_double(r.clip.stddev, 4) << ',' << format_double(r.clip.delta_pct, 2) << ','
        << format_double(r.fitness.mean, 4) << ',' << format_double(r.fitness.stddev, 4) << ','
        << format_double(r.fitness.delta_pct, 2) << ',' << r.wins << ',' << format_double(cr.aesthetic_delta_ref_pct, 2)
        << ',' << format_double(cr.clip_delta_ref_pct, 2) << ',' << format_double(cr.fitness_delta_ref_pct, 2) << '\n';
  }
  return out.str();
}

}  // namespace embopt
