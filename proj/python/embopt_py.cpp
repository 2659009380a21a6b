#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "embopt/adam.hpp"
#include "embopt/aggregate.hpp"
#include "embopt/cli.hpp"
#include "embopt/error.hpp"
#include "embopt/fitness.hpp"
#include "embopt/mock_backend.hpp"
#include "embopt/objective.hpp"
#include "embopt/run_io.hpp"
#include "embopt/sep_cmaes.hpp"
#include "embopt/similarity.hpp"

namespace py = pybind11;
using namespace embopt;

namespace {

// Maximizes whatever a Python callable returns for z.
class CallableObjective final : public Objective {
 public:
  CallableObjective(std::size_t d, std::function<double(std::vector<double>)> f) : d_(d), f_(std::move(f)) {}
  std::size_t dimension() const override { return d_; }
  Evaluation evaluate(std::span<const double> z) override {
    Evaluation e;
    e.fitness.value = f_(std::vector<double>(z.begin(), z.end()));
    return e;
  }

 private:
  std::size_t d_;
  std::function<double(std::vector<double>)> f_;
};

py::dict trace_dict(const RunResult& r) {
  py::list rows;
  for (const auto& e : r.trace.entries) {
    py::dict row;
    row["iteration"] = e.iteration;
    row["evaluations"] = e.evaluations;
    row["best_fitness"] = e.best_fitness;
    row["fitness"] = e.fitness;
    rows.append(row);
  }
  py::dict out;
  out["trace"] = rows;
  out["final_point"] = r.final_point.data();
  out["completed"] = r.completed;
  out["error"] = r.error;
  if (r.best) {
    out["best"] = r.best->embedding.data();
    out["best_fitness"] = r.best->evaluation.fitness.value;
  } else {
    out["best"] = py::none();
    out["best_fitness"] = py::none();
  }
  return out;
}

ImageBuffer to_image(const py::array_t<double, py::array::c_style | py::array::forcecast>& a, bool unit) {
  const auto info = a.request();
  if (info.ndim != 2 && !(info.ndim == 3 && info.shape[2] == 3)) {
    throw ValidationError("expected an HxW or HxWx3 array");
  }
  const auto* p = static_cast<const double*>(info.ptr);
  std::vector<double> data(p, p + info.size);
  return make_image(static_cast<int>(info.shape[1]), static_cast<int>(info.shape[0]), info.ndim == 2 ? 1 : 3,
                    unit ? SampleRange::unit : SampleRange::byte, std::move(data));
}

py::dict score_dict(const ScoreResponse& r) {
  py::dict d;
  d["aesthetic"] = r.aesthetic;
  d["clip"] = r.clip;
  d["image_id"] = r.image_id;
  if (r.image_png) {
    d["image_png"] = py::bytes(reinterpret_cast<const char*>(r.image_png->data()), r.image_png->size());
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_embopt, m) {
  m.attr("__version__") = kVersion;

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ArithmeticError);
  py::register_exception<ProtocolError>(m, "ProtocolError", PyExc_RuntimeError);
  py::register_exception<TransportError>(m, "TransportError", PyExc_ConnectionError);
  py::register_exception<ObjectiveError>(m, "ObjectiveError", PyExc_RuntimeError);

  py::class_<MetricScores>(m, "MetricScores")
      .def(py::init([](double aesthetic, double clip) { return MetricScores{aesthetic, clip, 0.0}; }),
           py::arg("aesthetic"), py::arg("clip"))
      .def_readwrite("aesthetic", &MetricScores::aesthetic)
      .def_readwrite("clip", &MetricScores::clip);

  py::class_<FitnessConfig>(m, "FitnessConfig")
      .def(py::init([](double a, double b, double da, double dc) { return FitnessConfig{a, b, da, dc}; }),
           py::arg("a") = 0.5, py::arg("b") = 0.5, py::arg("aesthetic_divisor") = 10.0,
           py::arg("clip_divisor") = 0.5)
      .def_readwrite("a", &FitnessConfig::a)
      .def_readwrite("b", &FitnessConfig::b)
      .def_readwrite("aesthetic_divisor", &FitnessConfig::aesthetic_divisor)
      .def_readwrite("clip_divisor", &FitnessConfig::clip_divisor)
      .def("validate", &FitnessConfig::validate);

  m.def(
      "fitness", [](const MetricScores& s, const FitnessConfig& c) { return fitness(s, c).value; }, py::arg("scores"),
      py::arg("config") = FitnessConfig{});
  m.def("loss", &loss);
  m.def(
      "clip_score", [](const std::vector<double>& u, const std::vector<double>& v) { return clip_score(u, v); });
  m.def("percent_change", &percent_change, py::arg("baseline"), py::arg("value"));
  m.def("fnv1a64", [](const std::string& s) { return fnv1a64(s); });

  m.def(
      "synthetic_scores",
      [](const std::vector<double>& z, const std::vector<double>& t) {
        const auto s = synthetic_scores(z, t);
        return py::make_tuple(s.aesthetic, s.clip);
      },
      py::arg("z"), py::arg("target"));
  m.def(
      "synthetic_gradient",
      [](const std::vector<double>& z, const std::vector<double>& t, const FitnessConfig& c) {
        return synthetic_gradient(z, t, c);
      },
      py::arg("z"), py::arg("target"), py::arg("config") = FitnessConfig{});

  py::class_<SepCmaSample>(m, "SepCmaSample")
      .def_property_readonly("candidates", [](const SepCmaSample& s) {
        std::vector<std::vector<double>> out;
        for (const auto& c : s.candidates) out.push_back(c.data());
        return out;
      });

  py::class_<SepCmaes>(m, "SepCmaes")
      .def(py::init([](const std::vector<double>& m0, double sigma0, std::size_t lambda, std::uint64_t seed) {
             return SepCmaes(EmbeddingVector(m0), sigma0, lambda, RngSeed{seed});
           }),
           py::arg("mean"), py::arg("sigma0") = 0.5, py::arg("lambda_") = 20, py::arg("seed") = 1)
      .def("ask", &SepCmaes::ask)
      .def("tell", [](SepCmaes& es, const SepCmaSample& s, const std::vector<double>& f) { es.tell(s, f); })
      .def_property_readonly("mean", [](const SepCmaes& es) { return es.state().mean; })
      .def_property_readonly("sigma", [](const SepCmaes& es) { return es.state().sigma; })
      .def_property_readonly("diag_c", [](const SepCmaes& es) { return es.state().diag_c; })
      .def_property_readonly("generation", [](const SepCmaes& es) { return es.state().generation; })
      .def_property_readonly("best_fitness", &SepCmaes::best_fitness);

  py::class_<AdamConfig>(m, "AdamConfig")
      .def(py::init([](double lr, double b1, double b2, double eps, double wd, bool coupled) {
             AdamConfig c;
             c.learning_rate = lr;
             c.beta1 = b1;
             c.beta2 = b2;
             c.epsilon = eps;
             c.weight_decay = wd;
             c.decay_mode = coupled ? WeightDecayMode::coupled_l2 : WeightDecayMode::decoupled;
             return c;
           }),
           py::arg("learning_rate") = 5e-3, py::arg("beta1") = 0.85, py::arg("beta2") = 0.98,
           py::arg("epsilon") = 1e-8, py::arg("weight_decay") = 1e-5, py::arg("coupled_l2") = false)
      .def_readwrite("learning_rate", &AdamConfig::learning_rate)
      .def_readwrite("weight_decay", &AdamConfig::weight_decay);

  py::class_<AdamState>(m, "AdamState")
      .def(py::init([](const std::vector<double>& z0) { return AdamState::initial(z0); }), py::arg("z0"))
      .def_readonly("z", &AdamState::z)
      .def_readonly("m", &AdamState::m)
      .def_readonly("v", &AdamState::v)
      .def_readonly("t", &AdamState::t);
  m.def(
      "adam_step", [](AdamState& s, const AdamConfig& c, const std::vector<double>& g) { adam_step(s, c, g); },
      py::arg("state"), py::arg("config"), py::arg("gradient"));
  m.def(
      "finite_difference_gradient",
      [](const std::function<double(std::vector<double>)>& f, const std::vector<double>& z, double h) {
        return finite_difference_gradient(
            [&](std::span<const double> x) { return f(std::vector<double>(x.begin(), x.end())); }, z, h);
      },
      py::arg("loss"), py::arg("z"), py::arg("h") = 1e-3);

  m.def(
      "maximize_sep_cmaes",
      [](const std::function<double(std::vector<double>)>& f, const std::vector<double>& m0, double sigma0,
         std::size_t lambda, std::size_t generations, std::uint64_t seed) {
        CallableObjective obj(m0.size(), f);
        SteadyClock clock;
        return trace_dict(run_sep_cmaes(obj, EmbeddingVector(m0), {sigma0, lambda, generations, RngSeed{seed}}, clock));
      },
      py::arg("f"), py::arg("m0"), py::arg("sigma0") = 0.5, py::arg("lambda_") = 20, py::arg("generations") = 100,
      py::arg("seed") = 1);
  m.def(
      "maximize_adam",
      [](const std::function<double(std::vector<double>)>& f, const std::vector<double>& z0, const AdamConfig& c,
         std::size_t iterations) {
        CallableObjective obj(z0.size(), f);
        SteadyClock clock;
        return trace_dict(run_adam(obj, EmbeddingVector(z0), c, iterations, clock));
      },
      py::arg("f"), py::arg("z0"), py::arg("config") = AdamConfig{}, py::arg("iterations") = 100);

  py::class_<MockBackend>(m, "MockBackend")
      .def(py::init([](std::vector<std::size_t> shape, double rho) { return MockBackend({std::move(shape), rho}); }),
           py::arg("shape") = std::vector<std::size_t>{4, 64}, py::arg("target_correlation") = 0.3)
      .def_property_readonly("dimension", &MockBackend::dimension)
      .def("health",
           [](MockBackend& b) {
             const auto h = b.health();
             return py::make_tuple(h.status, h.backend, h.embedding_shape);
           })
      .def("encode", [](MockBackend& b, const std::string& p) { return b.encode_prompt(p).data(); })
      .def("target", &MockBackend::target)
      .def(
          "generate_and_score",
          [](MockBackend& b, const std::string& prompt, const std::vector<double>& embedding, std::uint64_t seed,
             bool return_image, int width, int height) {
            GenerationRequest r;
            r.prompt = prompt;
            r.embedding = EmbeddingVector(embedding, b.config().shape);
            r.seed = seed;
            r.return_image = return_image;
            r.width = width;
            r.height = height;
            return score_dict(b.generate_and_score(r));
          },
          py::arg("prompt"), py::arg("embedding"), py::arg("seed") = 0, py::arg("return_image") = false,
          py::arg("width") = 512, py::arg("height") = 512);

  m.def(
      "ssim",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& b, bool unit) {
        return ssim(to_grayscale(to_image(a, unit)), to_grayscale(to_image(b, unit)));
      },
      py::arg("a"), py::arg("b"), py::arg("unit_range") = false,
      "Mean SSIM of two images (HxW or HxWx3; RGB is converted to luma first).");
  m.def(
      "cosine_distance",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& b) {
        const auto ia = a.request();
        const auto ib = b.request();
        const auto* pa = static_cast<const double*>(ia.ptr);
        const auto* pb = static_cast<const double*>(ib.ptr);
        return cosine_distance(std::span<const double>(pa, ia.size), std::span<const double>(pb, ib.size));
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"embopt"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the embopt tool in-process; returns (exit_code, stdout, stderr).");
}
