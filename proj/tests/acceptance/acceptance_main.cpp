// One line per acceptance criterion: [PASS] or [FAIL], the measured values, and the runtime.
// Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "embopt/adam.hpp"
#include "embopt/aggregate.hpp"
#include "embopt/fitness.hpp"
#include "embopt/harness.hpp"
#include "embopt/mock_backend.hpp"
#include "embopt/objective.hpp"
#include "embopt/random.hpp"
#include "embopt/run_io.hpp"
#include "embopt/sep_cmaes.hpp"
#include "embopt/similarity.hpp"
#include "support/functions.hpp"

using namespace embopt;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Criterion {
  const char* name;
  double max_seconds;  // 0: no runtime bound
  std::function<Verdict()> check;
};

// Tolerances and budgets.
constexpr double kTableTol = 5e-4;
constexpr double kPercentTol = 0.02;
constexpr double kInvarianceTol = 1e-9;
constexpr double kAdamStepTol = 1e-9;
constexpr double kGradientRelTol = 1e-5;
constexpr double kConstantSsim = 0.4707;
constexpr double kConstantSsimTol = 1e-3;
constexpr std::size_t kSphereBudget = 130;     // reference seeds 1..5: 103..114 generations
constexpr std::size_t kEllipsoidBudget = 250;  // reference seeds 1..5: 208..221 generations
constexpr std::size_t kAdamQuadraticSteps = 5000;
constexpr std::size_t kMinWins = 24;

Verdict table_arithmetic() {
  Verdict v;
  const double f = fitness(MetricScores{6.13, 0.3084, 0}, FitnessConfig{0.5, 0.5, 10.0, 0.5}).value;
  const double p1 = percent_change(0.5751, 0.8012);
  const double p2 = percent_change(0.5751, 0.7208);
  v.require(std::abs(f - 0.6149) <= kTableTol, "fitness " + fmt("%.6f", f));
  v.require(std::abs(p1 - 39.32) <= kPercentTol, "pct " + fmt("%.4f", p1));
  v.require(std::abs(p2 - 25.33) <= kPercentTol, "pct " + fmt("%.4f", p2));
  v.note("F=" + fmt("%.4f", f) + " d1=" + fmt("%.2f", p1) + "% d2=" + fmt("%.2f", p2) + "%");
  return v;
}

Verdict sep_convergence() {
  Verdict v;
  const auto s = testing::converge(testing::neg_sphere, 16, 3.0, -1e-6, kSphereBudget);
  v.require(s.generations > 0, "sphere best " + fmt("%.3g", s.best));
  const auto e = testing::converge(testing::neg_ellipsoid, 16, 3.0, -1e-6, kEllipsoidBudget);
  v.require(e.generations > 0, "ellipsoid best " + fmt("%.3g", e.best));
  std::vector<double> coef;
  for (std::size_t j = 0; j < 16; ++j) coef.push_back(testing::ellipsoid_coefficient(j, 16));
  const double rho = testing::spearman(e.diag_c, coef);
  v.require(rho < 0.0, "rank correlation " + fmt("%.3f", rho));
  v.note("sphere " + std::to_string(s.generations) + "/" + std::to_string(kSphereBudget) + " gens, ellipsoid " +
         std::to_string(e.generations) + "/" + std::to_string(kEllipsoidBudget) + " gens, spearman(diag_c, coef)=" +
         fmt("%.3f", rho));
  return v;
}

Verdict sep_memory() {
  Verdict v;
  for (std::size_t d : {16, 4096}) {
    SepCmaes es(EmbeddingVector(std::vector<double>(d, 0.0)), 0.5, 20, RngSeed{1});
    const auto lengths = es.state().array_lengths();
    v.require(lengths == std::vector<std::size_t>(4, d), "array lengths at d=" + std::to_string(d));
  }
  v.require(sizeof(SepCmaState) == 4 * sizeof(std::vector<double>) + sizeof(double) + sizeof(std::size_t),
            "state layout");
  v.note("4 arrays of length d at d=16 and d=4096");
  return v;
}

Verdict invariance() {
  Verdict v;
  double rank_dev = 0.0, shift_dev = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    SepCmaes a(EmbeddingVector(std::vector<double>(6, 1.0)), 0.4, 12, RngSeed{100ULL + trial});
    SepCmaes b(EmbeddingVector(std::vector<double>(6, 1.0)), 0.4, 12, RngSeed{100ULL + trial});
    for (int g = 0; g < 15; ++g) {
      const auto sa = a.ask();
      const auto sb = b.ask();
      std::vector<double> fa, fb;
      for (const auto& x : sa.candidates) {
        const double f = testing::neg_ellipsoid(x.view());
        fa.push_back(f);
        fb.push_back(std::exp(f) * 5.0 - 2.0 + std::atan(f));
      }
      a.tell(sa, fa);
      b.tell(sb, fb);
      for (std::size_t j = 0; j < 6; ++j) {
        rank_dev = std::max({rank_dev, std::abs(a.state().mean[j] - b.state().mean[j]),
                             std::abs(a.state().diag_c[j] - b.state().diag_c[j])});
      }
      rank_dev = std::max(rank_dev, std::abs(a.state().sigma - b.state().sigma));
    }
  }
  const std::vector<double> c{10.0, -3.0, 0.5, 7.25};
  const std::vector<double> m0{1.0, 2.0, -1.0, 0.5};
  std::vector<double> m0c(4);
  for (int j = 0; j < 4; ++j) m0c[j] = m0[j] + c[j];
  SepCmaes a(EmbeddingVector(m0), 0.5, 20, RngSeed{4});
  SepCmaes b(EmbeddingVector(m0c), 0.5, 20, RngSeed{4});
  for (int g = 0; g < 60; ++g) {
    const auto sa = a.ask();
    const auto sb = b.ask();
    std::vector<double> fa, fb;
    for (std::size_t i = 0; i < sa.candidates.size(); ++i) {
      fa.push_back(testing::neg_ellipsoid(sa.candidates[i].view()));
      std::vector<double> z(4);
      for (int j = 0; j < 4; ++j) z[j] = sb.candidates[i].data()[j] - c[j];
      fb.push_back(testing::neg_ellipsoid(z));
    }
    a.tell(sa, fa);
    b.tell(sb, fb);
    for (int j = 0; j < 4; ++j) shift_dev = std::max(shift_dev, std::abs(b.state().mean[j] - c[j] - a.state().mean[j]));
  }
  v.require(rank_dev <= kInvarianceTol, "rank deviation " + fmt("%.3g", rank_dev));
  v.require(shift_dev <= kInvarianceTol, "shift deviation " + fmt("%.3g", shift_dev));
  v.note("max rank deviation " + fmt("%.3g", rank_dev) + ", max shift deviation " + fmt("%.3g", shift_dev));
  return v;
}

Verdict adam_oracle() {
  Verdict v;
  AdamConfig cfg;
  cfg.weight_decay = 0.0;
  auto s = AdamState::initial(std::vector<double>{0.0});
  adam_step(s, cfg, std::vector<double>{1.0});
  v.require(std::abs(s.z[0] + 0.005) <= kAdamStepTol, "first step " + fmt("%.12g", s.z[0]));

  auto q = AdamState::initial(std::vector<double>(8, 1.0));
  for (std::size_t t = 0; t < kAdamQuadraticSteps; ++t) adam_step(q, cfg, q.z);  // grad of |z|^2/2
  double inf = 0.0;
  for (double x : q.z) inf = std::max(inf, std::abs(x));
  v.require(inf < 1e-2, "quadratic |z|_inf " + fmt("%.3g", inf));
  v.note("first step z=" + fmt("%.10f", s.z[0]) + ", |z|_inf after " + std::to_string(kAdamQuadraticSteps) +
         " steps=" + fmt("%.3g", inf));
  return v;
}

Verdict gradient_oracle() {
  Verdict v;
  Rng rng(RngSeed{2718});
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + rng.next_u64() % 30;
    const auto t = standard_normal_draws(rng, d);
    const auto z = standard_normal_draws(rng, d);
    const FitnessConfig cfg{rng.uniform(), rng.uniform() + 0.01, 5.0 + 10.0 * rng.uniform(), 0.2 + rng.uniform()};
    const auto g = synthetic_gradient(z, t, cfg);
    const double h = 1e-5;
    auto probe = z;
    double err = 0.0, norm = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      probe[j] = z[j] + h;
      const double fp = fitness(synthetic_scores(probe, t), cfg).value;
      probe[j] = z[j] - h;
      const double fm = fitness(synthetic_scores(probe, t), cfg).value;
      probe[j] = z[j];
      err = std::max(err, std::abs((fp - fm) / (2.0 * h) - g[j]));
      norm = std::max(norm, std::abs(g[j]));
    }
    worst = std::max(worst, err / std::max(norm, 1e-12));
  }
  v.require(worst < kGradientRelTol, "relative error " + fmt("%.3g", worst));
  v.note("worst relative error " + fmt("%.3g", worst) + " over 100 triples");
  return v;
}

Verdict similarity_oracle() {
  Verdict v;
  Rng rng(RngSeed{31});
  for (int i = 0; i < 10; ++i) {
    const int w = 16 + static_cast<int>(rng.next_u64() % 48);
    const int h = 16 + static_cast<int>(rng.next_u64() % 48);
    std::vector<double> px(static_cast<std::size_t>(w) * h);
    for (auto& x : px) x = std::floor(256.0 * rng.uniform());
    const auto img = make_image(w, h, 1, SampleRange::byte, px);
    v.require(ssim(img, img) == 1.0, "ssim(a,a)");
    v.require(cosine_distance(img, img) <= 1e-15, "cosine_distance(a,a)");
  }
  const auto a = make_image(16, 16, 1, SampleRange::unit, std::vector<double>(256, 0.2));
  const auto b = make_image(16, 16, 1, SampleRange::unit, std::vector<double>(256, 0.8));
  const double s = ssim(a, b);
  v.require(std::abs(s - kConstantSsim) <= kConstantSsimTol, "constant ssim " + fmt("%.6f", s));
  v.note("identities hold on 10 random images, constant-image ssim=" + fmt("%.4f", s));
  return v;
}

Verdict qualitative() {
  Verdict v;
  const auto prompts = read_prompt_file(std::string(EMBOPT_SOURCE_DIR) + "/prompts/parti36.txt");
  v.require(prompts.size() == 36, "36 prompts");
  MockBackend backend;
  const std::pair<const char*, FitnessConfig> presets[] = {{"(1,0)", FitnessConfig{1.0, 0.0, 10.0, 0.5}},
                                                           {"(0.5,0.5)", FitnessConfig{0.5, 0.5, 10.0, 0.5}},
                                                           {"(0,1)", FitnessConfig{0.0, 1.0, 10.0, 0.5}}};
  for (const auto& [name, fc] : presets) {
    ExperimentConfig cfg;
    cfg.fitness = fc;
    cfg.sep_cmaes.generations = 100;
    cfg.sep_cmaes.lambda = 20;
    cfg.budget.mode = BudgetMode::evaluations;
    cfg.compute_similarity = false;
    const auto result = run_experiment(backend, prompts, cfg);
    const auto report = aggregate(baseline_records(result), final_records(result), cfg.optimizer_ids(), fc);
    const auto& es = report.rows[1];
    const auto& adam = report.rows[2];
    v.require(!result.any_failed, std::string(name) + " prompt failures");
    v.require(es.fitness.mean > adam.fitness.mean, std::string(name) + " mean fitness");
    v.require(es.wins >= kMinWins, std::string(name) + " wins " + std::to_string(es.wins));
    v.note(std::string(name) + ": F sep=" + fmt("%.4f", es.fitness.mean) + " adam=" + fmt("%.4f", adam.fitness.mean) +
           " wins " + std::to_string(es.wins) + "/" + std::to_string(adam.wins) + "/36");
  }
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism() {
  Verdict v;
  auto prompts = read_prompt_file(std::string(EMBOPT_SOURCE_DIR) + "/prompts/parti36.txt");
  prompts.resize(6);
  ExperimentConfig cfg;
  cfg.sep_cmaes.generations = 20;
  cfg.generation.width = cfg.generation.height = 64;
  const auto root = fs::temp_directory_path() / "embopt_acceptance_determinism";
  fs::remove_all(root);
  for (const char* name : {"a", "b"}) {
    MockBackend backend;
    write_run_directory(root / name, run_experiment(backend, prompts, cfg), RunMetadata{"mock", "parti36.txt"});
  }
  std::size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), root / "a");
    ++files;
    v.require(slurp(entry.path()) == slurp(root / "b" / rel), rel.string() + " differs");
  }
  v.require(files > 20, "file count " + std::to_string(files));
  v.note(std::to_string(files) + " files byte-identical across two runs");
  fs::remove_all(root);
  return v;
}

Verdict budget_properties() {
  Verdict v;
  Rng rng(RngSeed{999});
  std::size_t violations = 0;
  for (int i = 0; i < 1000; ++i) {
    RunTrace t{"p", "adam", {}};
    const std::size_t n = rng.next_u64() % 40;
    double wall = 0.0, best = -INFINITY;
    for (std::size_t k = 0; k < n; ++k) {
      wall += rng.uniform();
      const double f = rng.normal();
      best = std::max(best, f);
      TraceEntry e;
      e.iteration = k + 1;
      e.evaluations = (k + 1) * 5;
      e.wall_seconds = wall;
      e.best_fitness = best;
      e.fitness = f;
      t.entries.push_back(e);
    }
    const double b1 = 25.0 * rng.uniform();
    const double b2 = b1 + 25.0 * rng.uniform();
    const auto once = clip_trace_to_budget(t, b1);
    const auto twice = clip_trace_to_budget(once, b1);
    bool same = once.entries.size() == twice.entries.size();
    for (std::size_t k = 0; same && k < once.entries.size(); ++k) {
      same = once.entries[k].best_fitness == twice.entries[k].best_fitness &&
             once.entries[k].wall_seconds == twice.entries[k].wall_seconds;
    }
    const double base = -100.0;
    auto final_best = [&](const RunTrace& r) { return r.entries.empty() ? base : r.entries.back().best_fitness; };
    const bool monotone = final_best(once) <= final_best(clip_trace_to_budget(t, b2));
    if (!same || !monotone) ++violations;
  }
  v.require(violations == 0, std::to_string(violations) + " violations");
  v.note("1000 random traces, " + std::to_string(violations) + " violations");
  return v;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"table-3 arithmetic reproduction", 1.0, table_arithmetic},
      {"sep-CMA-ES convergence (sphere, separable ellipsoid)", 30.0, sep_convergence},
      {"sep-CMA-ES O(d) state", 0.0, sep_memory},
      {"rank and translation invariance of tell", 0.0, invariance},
      {"Adam single-step oracle and quadratic convergence", 10.0, adam_oracle},
      {"synthetic gradient oracle", 0.0, gradient_oracle},
      {"similarity oracles", 0.0, similarity_oracle},
      {"qualitative replication on the 36-prompt synthetic suite", 600.0, qualitative},
      {"determinism of mock-backend runs", 0.0, determinism},
      {"budget monotonicity and clip idempotence", 0.0, budget_properties},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.max_seconds > 0.0 && secs >= c.max_seconds) v.require(false, "runtime over " + fmt("%.0f s", c.max_seconds));
    std::printf("[%s] %s (%.2f s): %s\n", v.pass ? "PASS" : "FAIL", c.name, secs, v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  std::printf("%d/%zu acceptance criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
