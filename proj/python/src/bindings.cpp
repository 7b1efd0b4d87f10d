#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "daimc/error.hpp"
#include "daimc/evaluation.hpp"
#include "daimc/factorization.hpp"
#include "daimc/harness.hpp"
#include "daimc/seminmf.hpp"

namespace py = pybind11;
using namespace daimc;
using data::MultiViewDataset;

namespace {

MultiViewDataset make_dataset(std::vector<Matrix> views,
                              std::optional<data::IndicatorMatrix::Storage> mask,
                              std::optional<data::Labels> labels, std::vector<std::string> names) {
  if (mask) return {std::move(views), data::IndicatorMatrix(*mask), std::move(labels), std::move(names)};
  return {std::move(views), std::move(labels), std::move(names)};
}

harness::ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  return harness::config_from_json(j);
}

}  // namespace

PYBIND11_MODULE(_daimc, m) {
  m.doc() = "Incomplete multi-view clustering by aligned semi-NMF";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<ConstraintViolation>(m, "ConstraintViolation", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::class_<MultiViewDataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("views"), py::arg("mask") = py::none(),
           py::arg("labels") = py::none(), py::arg("names") = std::vector<std::string>{})
      .def_property_readonly("n_views", &MultiViewDataset::n_views)
      .def_property_readonly("n_instances", &MultiViewDataset::n_instances)
      .def_property_readonly("views", &MultiViewDataset::views)
      .def_property_readonly("mask", [](const MultiViewDataset& d) { return d.indicator().entries(); })
      .def_property_readonly("labels", &MultiViewDataset::labels)
      .def_property_readonly("names", &MultiViewDataset::names)
      .def("view", &MultiViewDataset::view, py::arg("v"))
      .def("with_view", &MultiViewDataset::with_view, py::arg("v"), py::arg("x"))
      .def("subset_views", &MultiViewDataset::subset_views, py::arg("keep"))
      .def("__eq__", [](const MultiViewDataset& a, const MultiViewDataset& b) { return a == b; })
      .def("__repr__", [](const MultiViewDataset& d) {
        return "<Dataset views=" + std::to_string(d.n_views()) +
               " instances=" + std::to_string(d.n_instances()) + ">";
      });

  py::class_<data::SynthSpec>(m, "SynthSpec")
      .def(py::init<>())
      .def_readwrite("n_per_cluster", &data::SynthSpec::n_per_cluster)
      .def_readwrite("k_clusters", &data::SynthSpec::k_clusters)
      .def_readwrite("n_views", &data::SynthSpec::n_views)
      .def_readwrite("dims", &data::SynthSpec::dims)
      .def_readwrite("separation", &data::SynthSpec::separation)
      .def_readwrite("noise_sd", &data::SynthSpec::noise_sd)
      .def_readwrite("seed", &data::SynthSpec::seed);

  m.def("synth_planted", &data::synth_planted, py::arg("spec"));
  m.def("apply_incomplete_rate", &data::apply_incomplete_rate, py::arg("dataset"), py::arg("rate"),
        py::arg("seed"));
  m.def("removal_count", &data::removal_count, py::arg("rate"), py::arg("n"));
  m.def("load_manifest", &data::load_manifest, py::arg("path"));
  m.def("save_manifest", &data::save_manifest, py::arg("dataset"), py::arg("dir"));

  py::enum_<model::RegressionForm>(m, "RegressionForm")
      .value("woodbury", model::RegressionForm::woodbury)
      .value("direct", model::RegressionForm::direct);

  py::class_<model::Hyperparams>(m, "Hyperparams")
      .def(py::init<>())
      .def_readwrite("alpha", &model::Hyperparams::alpha)
      .def_readwrite("beta", &model::Hyperparams::beta)
      .def_readwrite("k", &model::Hyperparams::k)
      .def_readwrite("outer_tol", &model::Hyperparams::outer_tol)
      .def_readwrite("inner_tol", &model::Hyperparams::inner_tol)
      .def_readwrite("outer_max", &model::Hyperparams::outer_max)
      .def_readwrite("inner_max", &model::Hyperparams::inner_max)
      .def_readwrite("epsilon", &model::Hyperparams::epsilon)
      .def_readwrite("seed", &model::Hyperparams::seed)
      .def_readwrite("regression_form", &model::Hyperparams::regression_form);

  py::class_<model::FactorizationState>(m, "FactorizationState")
      .def(py::init<>())
      .def_readwrite("basis", &model::FactorizationState::basis)
      .def_readwrite("latent", &model::FactorizationState::latent)
      .def_readwrite("regression", &model::FactorizationState::regression)
      .def_readonly("objective_trace", &model::FactorizationState::objective_trace)
      .def_readonly("pre_normalization_trace", &model::FactorizationState::pre_normalization_trace)
      .def_readonly("iterations", &model::FactorizationState::iterations)
      .def_readonly("converged", &model::FactorizationState::converged);

  m.def("initialize", &model::initialize, py::arg("dataset"), py::arg("hp"));
  m.def("fit", &model::fit, py::arg("dataset"), py::arg("hp"),
        py::call_guard<py::gil_scoped_release>());
  m.def("fit_from", &model::fit_from, py::arg("dataset"), py::arg("hp"), py::arg("state"),
        py::call_guard<py::gil_scoped_release>());
  m.def("objective", &model::objective, py::arg("dataset"), py::arg("state"), py::arg("hp"));
  m.def("normalize", &model::normalize, py::arg("state"));
  m.def("solve_sylvester", &model::solve_sylvester, py::arg("a"), py::arg("b"), py::arg("c"));
  m.def("kkt_residual", &model::kkt_residual, py::arg("dataset"), py::arg("state"));

  py::class_<seminmf::State>(m, "SemiNMFState")
      .def_readonly("u", &seminmf::State::u)
      .def_readonly("v", &seminmf::State::v)
      .def_readonly("objective", &seminmf::State::objective)
      .def_readonly("trace", &seminmf::State::trace)
      .def_readonly("iterations", &seminmf::State::iterations);
  m.def(
      "seminmf",
      [](const Matrix& x, Eigen::Index k, std::uint64_t seed, double tol, int max_iter) {
        seminmf::Options o;
        o.tol = tol;
        o.max_iter = max_iter;
        return seminmf::fit(x, k, seed, o);
      },
      py::arg("x"), py::arg("k"), py::arg("seed") = 0, py::arg("tol") = 1e-6,
      py::arg("max_iter") = 200);

  py::class_<eval::ClusterResult>(m, "ClusterResult")
      .def_readonly("assignments", &eval::ClusterResult::assignments)
      .def_readonly("centroids", &eval::ClusterResult::centroids)
      .def_readonly("inertia", &eval::ClusterResult::inertia);
  m.def(
      "kmeans",
      [](const Matrix& points, int k, std::uint64_t seed, int restarts) {
        eval::KMeansOptions o;
        o.restarts = restarts;
        return eval::kmeans(points, k, seed, o);
      },
      py::arg("points"), py::arg("k"), py::arg("seed") = 0, py::arg("restarts") = 20);
  m.def("nmi", &eval::nmi, py::arg("truth"), py::arg("pred"));
  m.def("accuracy", &eval::accuracy, py::arg("truth"), py::arg("pred"));

  m.def(
      "_sweep",
      [](const std::string& config) {
        const auto cfg = parse_config(config);
        harness::RunReport rep;
        {
          py::gil_scoped_release release;
          rep = harness::sweep(cfg);
        }
        return harness::report_json(rep, cfg).dump();
      },
      py::arg("config"));
  m.def(
      "_run",
      [](const std::string& config, const std::filesystem::path& out) {
        const auto cfg = parse_config(config);
        harness::RunReport rep;
        {
          py::gil_scoped_release release;
          rep = harness::run_single(cfg, out);
        }
        return harness::report_json(rep, cfg).dump();
      },
      py::arg("config"), py::arg("out"));
}
