#include "embopt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

#include "embopt/error.hpp"
#include "embopt/similarity.hpp"

namespace embopt {

std::vector<Prompt> parse_prompt_list(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t");
    lines.push_back(line.substr(first, last - first + 1));
  }
  const std::size_t width = std::max<std::size_t>(2, std::to_string(lines.size()).size());
  std::vector<Prompt> prompts;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto num = std::to_string(i + 1);
    prompts.push_back({"p" + std::string(width - num.size(), '0') + num, lines[i]});
  }
  return prompts;
}

std::vector<Prompt> read_prompt_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read prompt file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_prompt_list(buf.str());
}

const char* to_string(BudgetMode mode) {
  switch (mode) {
    case BudgetMode::generations: return "generations";
    case BudgetMode::evaluations: return "evaluations";
    case BudgetMode::wall_seconds: return "wall-seconds";
  }
  return "?";
}

BudgetMode parse_budget_mode(const std::string& text) {
  if (text == "generations") return BudgetMode::generations;
  if (text == "evaluations") return BudgetMode::evaluations;
  if (text == "wall-seconds") return BudgetMode::wall_seconds;
  throw ValidationError("unknown budget mode '" + text + "'");
}

void ExperimentConfig::validate() const {
  fitness.validate();
  adam.validate();
  if (!use_sep_cmaes && !use_adam) throw ValidationError("experiment: no optimizer selected");
  if (use_sep_cmaes) {
    if (!(sep_cmaes.sigma0 > 0.0)) throw ValidationError("experiment: sigma must be positive");
    if (sep_cmaes.lambda < 2) throw ValidationError("experiment: lambda must be >= 2");
  }
  if (budget.value && !(*budget.value >= 0.0)) throw ValidationError("experiment: budget must be >= 0");
  if (use_adam && !use_sep_cmaes && !budget.value && budget.mode != BudgetMode::generations) {
    throw ValidationError("experiment: an Adam-only run needs an explicit budget value or generations mode");
  }
  if (!(seconds_per_evaluation >= 0.0)) throw ValidationError("experiment: seconds per evaluation must be >= 0");
  if (parallel_prompts < 1) throw ValidationError("experiment: parallel prompts must be >= 1");
}

std::vector<std::string> ExperimentConfig::optimizer_ids() const {
  std::vector<std::string> ids;
  if (use_sep_cmaes) ids.emplace_back("sep-cmaes");
  if (use_adam) ids.emplace_back("adam");
  return ids;
}

RngSeed prompt_seed(std::uint64_t run_seed, std::size_t index) {
  Rng rng(RngSeed{run_seed ^ (0xD1B54A32D192ED03ULL * (index + 1))});
  return RngSeed{rng.next_u64()};
}

namespace {

template <typename Fn>
void for_each_prompt(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// Clock owned by one optimizer run, plus the objective view that feeds it.
struct RunContext {
  std::unique_ptr<Clock> clock;
  std::unique_ptr<ClockedObjective> clocked;
  Objective* objective = nullptr;

  RunContext(Objective& inner, const ExperimentConfig& cfg) {
    if (cfg.virtual_clock) {
      auto vc = std::make_unique<VirtualClock>();
      clocked = std::make_unique<ClockedObjective>(inner, *vc, cfg.seconds_per_evaluation);
      objective = clocked.get();
      clock = std::move(vc);
    } else {
      clock = std::make_unique<SteadyClock>();
      objective = &inner;
    }
  }
};

struct Snapshot {
  std::size_t iteration;
  EmbeddingVector embedding;
};

/// Final candidate of a run: the best entry of the effective trace, or the baseline.
void settle_final(OptimizerOutcome& out, const PromptRecord& rec, const std::vector<Snapshot>& snapshots,
                  const FitnessConfig& cfg) {
  if (out.effective.entries.empty()) {
    out.final_embedding = rec.initial;
    out.final_evaluation = rec.baseline;
    return;
  }
  const auto& last = out.effective.entries.back();
  out.final_evaluation.scores = last.best_scores;
  out.final_evaluation.fitness = fitness(last.best_scores, cfg);
  out.final_embedding = rec.initial;
  for (const auto& s : snapshots) {
    if (s.iteration > last.iteration) break;
    out.final_embedding = s.embedding;
  }
}

void run_one(OptimizerOutcome& out, PromptRecord& rec, Objective& objective, const ExperimentConfig& cfg,
             std::size_t prompt_index, std::size_t adam_iterations, std::optional<double> clip_seconds,
             std::vector<Snapshot>& snapshots) {
  RunContext ctx(objective, cfg);
  const IterationObserver observer = [&](const TraceEntry& e, const EmbeddingVector* improved) {
    if (improved) snapshots.push_back({e.iteration, *improved});
  };
  RunResult result;
  if (out.optimizer == "sep-cmaes") {
    auto rc = cfg.sep_cmaes;
    rc.seed = prompt_seed(cfg.seed, prompt_index);
    result = run_sep_cmaes(*ctx.objective, rec.initial, rc, *ctx.clock, observer);
  } else {
    result = run_adam(*ctx.objective, rec.initial, cfg.adam, adam_iterations, *ctx.clock, observer);
  }
  result.trace.prompt_id = rec.prompt.id;
  out.trace = result.trace;
  out.effective = clip_seconds ? clip_trace_to_budget(result.trace, *clip_seconds) : result.trace;
  if (!result.completed) {
    out.failed = true;
    out.error = result.error;
  }
}

std::size_t adam_steps_for(const Objective& objective, double budget_evals) {
  const auto per_step = adam_evaluations_per_step(objective);
  return static_cast<std::size_t>(budget_evals) / per_step;
}

void measure_similarity(Backend& backend, PromptRecord& rec, const ExperimentConfig& cfg) {
  auto render = [&](const EmbeddingVector& z) {
    GenerationRequest req;
    req.prompt = rec.prompt.text;
    req.embedding = z;
    req.seed = cfg.generation.seed;
    req.inference_steps = cfg.generation.inference_steps;
    req.guidance_scale = cfg.generation.guidance_scale;
    req.width = cfg.generation.width;
    req.height = cfg.generation.height;
    req.return_image = true;
    const auto resp = backend.generate_and_score(req);
    if (!resp.image_png) throw ProtocolError("backend returned no image although one was requested");
    return to_grayscale(decode_png(*resp.image_png));
  };
  const auto base_img = render(rec.initial);
  for (auto& out : rec.outcomes) {
    if (out.failed) continue;
    const auto img = render(out.final_embedding);
    out.cosine_distance = cosine_distance(base_img, img);
    out.ssim = ssim(base_img, img);
  }
}

}  // namespace

ExperimentResult run_experiment(Backend& backend, const std::vector<Prompt>& prompts,
                                const ExperimentConfig& config) {
  config.validate();
  if (prompts.empty()) throw ValidationError("experiment: no prompts");

  ExperimentResult result;
  result.config = config;
  const auto health = backend.health();
  result.embedding_shape = health.embedding_shape;
  result.backend_kind = health.backend;

  result.prompts.resize(prompts.size());
  std::vector<std::vector<std::vector<Snapshot>>> snapshots(prompts.size());

  // Phase 1: encode, baseline, sep-CMA-ES.
  for_each_prompt(prompts.size(), config.parallel_prompts, [&](std::size_t i) {
    auto& rec = result.prompts[i];
    rec.prompt = prompts[i];
    snapshots[i].resize(2);
    try {
      rec.initial = backend.encode_prompt(rec.prompt.text);
      BackendObjective objective(backend, rec.prompt.text, rec.initial.shape(), config.fitness, config.generation);
      rec.baseline = objective.evaluate(rec.initial.view());
      if (config.use_sep_cmaes) {
        OptimizerOutcome out;
        out.optimizer = "sep-cmaes";
        if (config.sep_cmaes.generations > 0) {
          run_one(out, rec, objective, config, i, 0, std::nullopt, snapshots[i][0]);
        }
        out.effective = out.trace;
        out.effective.prompt_id = out.trace.prompt_id = rec.prompt.id;
        out.effective.optimizer_id = out.trace.optimizer_id = "sep-cmaes";
        rec.outcomes.push_back(std::move(out));
      }
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
    }
  });

  // Phase 2: resolve Adam's budget against the sep-CMA-ES runs.
  std::optional<double> clip_seconds;
  double budget_evals = 0.0;
  if (config.use_adam) {
    if (config.budget.mode == BudgetMode::evaluations) {
      budget_evals = config.budget.value.value_or(
          static_cast<double>(config.sep_cmaes.lambda * config.sep_cmaes.generations));
      result.resolved_adam_budget = budget_evals;
    } else if (config.budget.mode == BudgetMode::wall_seconds) {
      if (config.budget.value) {
        clip_seconds = *config.budget.value;
      } else {
        std::vector<double> times;
        for (const auto& rec : result.prompts) {
          if (rec.failed || rec.outcomes.empty()) continue;
          const auto& t = rec.outcomes.front().trace.entries;
          times.push_back(t.empty() ? 0.0 : t.back().wall_seconds);
        }
        clip_seconds = summarize(times).mean;
      }
      result.resolved_adam_budget = clip_seconds;
    }
  }

  // Phase 3: Adam.
  for_each_prompt(prompts.size(), config.parallel_prompts, [&](std::size_t i) {
    auto& rec = result.prompts[i];
    if (rec.failed) return;
    try {
      BackendObjective objective(backend, rec.prompt.text, rec.initial.shape(), config.fitness, config.generation);
      if (config.use_adam) {
        OptimizerOutcome out;
        out.optimizer = "adam";
        std::size_t steps = config.adam_iterations;
        if (config.budget.mode == BudgetMode::evaluations) steps = adam_steps_for(objective, budget_evals);
        if (steps > 0) run_one(out, rec, objective, config, i, steps, clip_seconds, snapshots[i][1]);
        out.trace.prompt_id = out.effective.prompt_id = rec.prompt.id;
        out.trace.optimizer_id = out.effective.optimizer_id = "adam";
        rec.outcomes.push_back(std::move(out));
      }
      for (std::size_t k = 0; k < rec.outcomes.size(); ++k) {
        const auto slot = rec.outcomes[k].optimizer == "sep-cmaes" ? 0 : 1;
        settle_final(rec.outcomes[k], rec, snapshots[i][slot], config.fitness);
        if (rec.outcomes[k].failed) rec.failed = true;
        if (rec.outcomes[k].failed && rec.error.empty()) rec.error = rec.outcomes[k].error;
      }
      snapshots[i].clear();
      if (config.compute_similarity && !rec.failed) measure_similarity(backend, rec, config);
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
    }
  });

  result.any_failed = std::any_of(result.prompts.begin(), result.prompts.end(),
                                  [](const PromptRecord& r) { return r.failed; });
  return result;
}

std::vector<FinalRecord> baseline_records(const ExperimentResult& result) {
  std::vector<FinalRecord> out;
  for (const auto& rec : result.prompts) {
    if (rec.failed) continue;
    out.push_back({rec.prompt.id, "baseline", rec.baseline.scores, rec.baseline.fitness.value});
  }
  return out;
}

std::vector<FinalRecord> final_records(const ExperimentResult& result) {
  std::vector<FinalRecord> out;
  for (const auto& rec : result.prompts) {
    if (rec.failed) continue;
    for (const auto& o : rec.outcomes) {
      out.push_back({rec.prompt.id, o.optimizer, o.final_evaluation.scores, o.final_evaluation.fitness.value});
    }
  }
  return out;
}

}  // namespace embopt
