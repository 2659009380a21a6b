#include "embopt/cli.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include "embopt/error.hpp"
#include "embopt/http_backend.hpp"
#include "embopt/mock_backend.hpp"
#include "embopt/protocol.hpp"
#include "embopt/run_io.hpp"
#include "embopt/similarity.hpp"

namespace embopt::cli {

namespace fs = std::filesystem;

std::pair<double, double> preset_weights(const std::string& name) {
  if (name == "aesthetic") return {1.0, 0.0};
  if (name == "balanced") return {0.5, 0.5};
  if (name == "alignment") return {0.0, 1.0};
  throw ValidationError("unknown preset '" + name + "' (expected aesthetic, balanced, or alignment)");
}

FitnessConfig RunConfig::fitness() const {
  auto [pa, pb] = preset_weights(preset);
  FitnessConfig f{a.value_or(pa), b.value_or(pb), aesthetic_divisor, clip_divisor};
  f.validate();
  return f;
}

ExperimentConfig RunConfig::experiment() const {
  ExperimentConfig e;
  e.fitness = fitness();
  if (optimizer == "both") {
    e.use_sep_cmaes = e.use_adam = true;
  } else if (optimizer == "sep-cmaes") {
    e.use_adam = false;
  } else if (optimizer == "adam") {
    e.use_sep_cmaes = false;
  } else {
    throw ValidationError("unknown optimizer '" + optimizer + "'");
  }
  if (generations < 1) throw ValidationError("generations must be >= 1");
  e.sep_cmaes.generations = generations;
  e.sep_cmaes.lambda = lambda;
  e.sep_cmaes.sigma0 = sigma;
  e.adam.learning_rate = learning_rate;
  e.adam.beta1 = beta1;
  e.adam.beta2 = beta2;
  e.adam.epsilon = epsilon;
  e.adam.weight_decay = weight_decay;
  if (decay == "decoupled") {
    e.adam.decay_mode = WeightDecayMode::decoupled;
  } else if (decay == "coupled") {
    e.adam.decay_mode = WeightDecayMode::coupled_l2;
  } else {
    throw ValidationError("unknown decay mode '" + decay + "'");
  }
  e.adam.fd_step = fd_step;
  e.adam_iterations = adam_iterations;
  e.budget.mode = parse_budget_mode(budget_mode);
  e.budget.value = budget;
  e.seed = seed;
  e.parallel_prompts = parallel_prompts;
  if (clock == "auto") {
    e.virtual_clock = backend == "mock";
  } else if (clock == "virtual" || clock == "real") {
    e.virtual_clock = clock == "virtual";
  } else {
    throw ValidationError("unknown clock '" + clock + "'");
  }
  e.seconds_per_evaluation = seconds_per_evaluation;
  e.compute_similarity = similarity;
  e.validate();
  return e;
}

namespace {

constexpr const char* kBackendEnv = "EMBOPT_BACKEND";

std::unique_ptr<Backend> make_backend(const std::string& backend, const std::vector<std::size_t>& mock_shape) {
  if (backend == "mock") return std::make_unique<MockBackend>(MockBackendConfig{mock_shape});
  return std::make_unique<HttpBackend>(HttpBackendConfig{backend});
}

bool flag_given(const std::vector<std::string>& args, const std::string& name) {
  const auto flag = "--" + name;
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

/// Flat `key = value` lines; '#' and ';' start comments. Keys are flag names without dashes.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file " + path);
  std::vector<std::pair<std::string, std::string>> items;
  std::string line;
  auto trim = [](std::string s) {
    const auto f = s.find_first_not_of(" \t\r");
    if (f == std::string::npos) return std::string();
    const auto l = s.find_last_not_of(" \t\r");
    s = s.substr(f, l - f + 1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
  };
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ValidationError("config file: expected key = value, got '" + t + "'");
    items.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return items;
}

/// Insert config-file and environment values for every flag the command line did not set.
bool parse_switch(const std::string& key, std::string value) {
  std::transform(value.begin(), value.end(), value.begin(), [](unsigned char c) { return std::tolower(c); });
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ValidationError("config file: '" + key + "' expects true or false, got '" + value + "'");
}

std::vector<std::string> merge_sources(const std::vector<std::string>& args, const std::set<std::string>& known) {
  std::vector<std::string> user(args.begin() + 1, args.end());
  std::string config_path;
  for (std::size_t i = 0; i < user.size(); ++i) {
    if (user[i] == "--config" && i + 1 < user.size()) config_path = user[i + 1];
    if (user[i].rfind("--config=", 0) == 0) config_path = user[i].substr(9);
  }

  std::vector<std::string> injected;
  if (const char* env = std::getenv(kBackendEnv); env && *env && !flag_given(user, "backend")) {
    injected.push_back("--backend");
    injected.push_back(env);
  }
  if (!config_path.empty()) {
    for (const auto& [key, value] : read_config_file(config_path)) {
      if (!known.count(key)) throw ValidationError("config file: unknown key '" + key + "'");
      if (flag_given(user, key) || flag_given(injected, key)) continue;
      if (key == "similarity") {
        if (flag_given(user, "no-similarity")) continue;
        injected.push_back(parse_switch(key, value) ? "--similarity" : "--no-similarity");
        continue;
      }
      injected.push_back("--" + key);
      injected.push_back(value);
    }
  }
  // subcommand name stays first
  std::vector<std::string> merged{args.front()};
  if (!user.empty()) merged.push_back(user.front());
  merged.insert(merged.end(), injected.begin(), injected.end());
  if (user.size() > 1) merged.insert(merged.end(), user.begin() + 1, user.end());
  return merged;
}

void add_run_options(CLI::App& sub, RunConfig& rc, std::set<std::string>& known) {
  auto opt = [&](const std::string& name, auto& target, const std::string& help) {
    known.insert(name);
    return sub.add_option("--" + name, target, help)->capture_default_str();
  };
  opt("backend", rc.backend, "'mock' or http://host:port of a generate-and-score service");
  opt("preset", rc.preset, "Fitness weights: aesthetic (1,0), balanced (0.5,0.5), alignment (0,1)")
      ->check(CLI::IsMember({"aesthetic", "balanced", "alignment"}));
  opt("a", rc.a, "Aesthetic weight (overrides the preset)");
  opt("b", rc.b, "Alignment weight (overrides the preset)");
  opt("aesthetic-divisor", rc.aesthetic_divisor, "Normalization divisor for the aesthetic score");
  opt("clip-divisor", rc.clip_divisor, "Normalization divisor for the CLIP score");
  opt("optimizer", rc.optimizer, "sep-cmaes, adam, or both")->check(CLI::IsMember({"sep-cmaes", "adam", "both"}));
  opt("generations", rc.generations, "sep-CMA-ES generations")->check(CLI::PositiveNumber);
  opt("lambda", rc.lambda, "sep-CMA-ES population size")->check(CLI::Range(2, 1 << 20));
  opt("sigma", rc.sigma, "sep-CMA-ES initial step size")->check(CLI::PositiveNumber);
  opt("lr", rc.learning_rate, "Adam learning rate")->check(CLI::PositiveNumber);
  opt("beta1", rc.beta1, "Adam beta1");
  opt("beta2", rc.beta2, "Adam beta2");
  opt("epsilon", rc.epsilon, "Adam epsilon");
  opt("weight-decay", rc.weight_decay, "Adam weight decay");
  opt("decay", rc.decay, "decoupled or coupled weight decay")->check(CLI::IsMember({"decoupled", "coupled"}));
  opt("fd-step", rc.fd_step, "Central-difference step for Adam gradients");
  opt("adam-iterations", rc.adam_iterations, "Adam steps in generations and wall-seconds budget modes");
  opt("budget-mode", rc.budget_mode, "How Adam's budget is matched: generations, evaluations, wall-seconds")
      ->check(CLI::IsMember({"generations", "evaluations", "wall-seconds"}));
  opt("budget", rc.budget, "Explicit Adam budget (evaluations or seconds); default matches sep-CMA-ES");
  opt("seed", rc.seed, "Run seed");
  opt("out", rc.out, "Run directory to create");
  opt("prompts", rc.prompts, "Prompt list file");
  opt("mock-shape", rc.mock_shape, "Embedding shape served by the mock backend")->delimiter(',');
  opt("parallel-prompts", rc.parallel_prompts, "Prompts optimized concurrently")->check(CLI::PositiveNumber);
  opt("clock", rc.clock, "auto, virtual, or real")->check(CLI::IsMember({"auto", "virtual", "real"}));
  opt("seconds-per-eval", rc.seconds_per_evaluation, "Virtual seconds charged per evaluation");
  known.insert("similarity");
  sub.add_flag("--similarity,!--no-similarity", rc.similarity, "Measure SSIM/cosine distance to the baseline image");
  sub.add_option("--config", "Flat key = value file with defaults for any flag");
}

int cmd_optimize(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  ExperimentConfig exp;
  std::vector<Prompt> prompts;
  try {
    exp = rc.experiment();
    prompts = read_prompt_file(rc.prompts);
    if (prompts.empty()) throw ValidationError("prompt file " + rc.prompts + " holds no prompts");
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  std::unique_ptr<Backend> backend;
  try {
    backend = make_backend(rc.backend, rc.mock_shape);
    backend->health();
  } catch (const ValidationError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "backend unreachable: " << e.what() << '\n';
    return kBackendUnreachable;
  }

  const auto result = run_experiment(*backend, prompts, exp);
  RunMetadata meta{rc.backend, rc.prompts, nlohmann::json::object()};
  write_run_directory(rc.out, result, meta);

  std::size_t failed = 0;
  for (const auto& p : result.prompts) {
    if (p.failed) {
      ++failed;
      err << "prompt " << p.prompt.id << " failed: " << p.error << '\n';
    }
  }
  out << "wrote " << rc.out << " (" << prompts.size() - failed << "/" << prompts.size() << " prompts ok)\n";
  std::ifstream report(fs::path(rc.out) / "report.csv");
  out << report.rdbuf();
  return failed ? kPartialFailure : kSuccess;
}

int cmd_encode(const std::string& backend_name, const std::vector<std::size_t>& mock_shape, const std::string& prompt,
               std::ostream& out, std::ostream& err) {
  try {
    auto backend = make_backend(backend_name, mock_shape);
    out << protocol::encode_encode_response(backend->encode_prompt(prompt)).dump() << '\n';
    return kSuccess;
  } catch (const TransportError& e) {
    err << "backend unreachable: " << e.what() << '\n';
    return kBackendUnreachable;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

int cmd_report(const std::string& dir, std::ostream& out, std::ostream& err) {
  try {
    const auto run = read_run_directory(dir);
    const auto report = rewrite_report(run);
    out << format_report_csv(report);
    return run.failed.empty() ? kSuccess : kPartialFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

int cmd_compare(const std::vector<std::string>& dirs, std::optional<std::size_t> clip, const std::string& clip_mode,
                const std::string& out_dir, std::ostream& out, std::ostream& err) {
  try {
    std::vector<RunDirectory> runs;
    for (const auto& d : dirs) runs.push_back(read_run_directory(d));
    std::optional<std::size_t> clipped;
    if (clip) {
      if (*clip < 1 || *clip > runs.size()) throw ValidationError("--clip must name a run by 1-based position");
      clipped = *clip - 1;
    }
    const auto cmp = compare_runs(runs, clipped, parse_budget_mode(clip_mode));
    const auto csv = format_comparison_csv(cmp);
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      std::ofstream(fs::path(out_dir) / "comparison.csv", std::ios::binary) << csv;
    }
    out << csv;
    out << "ties," << cmp.report.wins.tied_prompts.size() << '\n';
    if (cmp.clip_budget) out << "clip_budget," << format_double(*cmp.clip_budget, -1) << '\n';
    return kSuccess;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

int cmd_serve(const std::string& host, int port, const std::vector<std::size_t>& mock_shape, std::ostream& out,
              std::ostream& err) {
  try {
    MockServer server(std::make_shared<MockBackend>(MockBackendConfig{mock_shape}));
    out << "serving mock backend on http://" << host << ":" << port << std::endl;
    server.listen(host, port);
    return kSuccess;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

int cmd_similarity(const std::string& a, const std::string& b, std::ostream& out, std::ostream& err) {
  try {
    const auto ia = to_grayscale(read_png_file(a));
    const auto ib = to_grayscale(read_png_file(b));
    out << "ssim," << format_double(ssim(ia, ib), -1) << '\n';
    out << "cosine_distance," << format_double(cosine_distance(read_png_file(a), read_png_file(b)), -1) << '\n';
    return kSuccess;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prompt-embedding optimization with sep-CMA-ES and Adam", "embopt"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::set<std::string> known;
  RunConfig rc;
  auto* optimize = app.add_subcommand("optimize", "Optimize every prompt of a prompt file and write a run directory");
  add_run_options(*optimize, rc, known);

  std::string encode_backend = "mock";
  std::string encode_prompt;
  std::vector<std::size_t> encode_shape{4, 64};
  auto* encode = app.add_subcommand("encode", "Print the backend's embedding of a prompt as JSON");
  encode->add_option("--backend", encode_backend, "'mock' or http://host:port")->envname(kBackendEnv);
  encode->add_option("--prompt", encode_prompt, "Prompt text")->required();
  encode->add_option("--mock-shape", encode_shape, "Mock embedding shape")->delimiter(',');

  std::vector<std::string> compare_dirs;
  std::optional<std::size_t> compare_clip;
  std::string compare_clip_mode = "wall-seconds";
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "Compare run directories over the same prompts");
  compare->add_option("runs", compare_dirs, "Run directories")->required()->expected(2, 64);
  compare->add_option("--clip", compare_clip, "1-based run whose traces are clipped to the other's mean budget");
  compare->add_option("--clip-mode", compare_clip_mode, "wall-seconds or evaluations")
      ->check(CLI::IsMember({"wall-seconds", "evaluations"}));
  compare->add_option("--out", compare_out, "Directory for comparison.csv");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "Recompute report.csv of a run directory offline");
  report->add_option("run", report_dir, "Run directory")->required();

  std::string serve_host = "127.0.0.1";
  int serve_port = 8000;
  std::vector<std::size_t> serve_shape{4, 64};
  auto* serve = app.add_subcommand("serve", "Serve the deterministic mock backend over HTTP");
  serve->add_option("--host", serve_host, "Bind address");
  serve->add_option("--port", serve_port, "Port")->check(CLI::Range(1, 65535));
  serve->add_option("--mock-shape", serve_shape, "Embedding shape")->delimiter(',');

  std::string sim_a, sim_b;
  auto* similarity = app.add_subcommand("similarity", "SSIM and cosine distance between two PNG images");
  similarity->add_option("a", sim_a, "First image")->required();
  similarity->add_option("b", sim_b, "Second image")->required();

  std::vector<std::string> args(argv, argv + argc);
  try {
    if (args.size() > 1 && args[1] == "optimize") args = merge_sources(args, known);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  if (*optimize) return cmd_optimize(rc, out, err);
  if (*encode) return cmd_encode(encode_backend, encode_shape, encode_prompt, out, err);
  if (*compare) return cmd_compare(compare_dirs, compare_clip, compare_clip_mode, compare_out, out, err);
  if (*report) return cmd_report(report_dir, out, err);
  if (*serve) return cmd_serve(serve_host, serve_port, serve_shape, out, err);
  if (*similarity) return cmd_similarity(sim_a, sim_b, out, err);
  return kConfigError;
}

}  // namespace embopt::cli
