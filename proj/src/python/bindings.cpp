#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "enfuse/benchmarks.hpp"
#include "enfuse/data.hpp"
#include "enfuse/error.hpp"
#include "enfuse/fusion.hpp"
#include "enfuse/mopso.hpp"
#include "enfuse/regression.hpp"
#include "enfuse/report.hpp"
#include "enfuse/stats.hpp"
#include "enfuse/synth.hpp"

namespace py = pybind11;
using namespace enfuse;

namespace {

py::dict to_dict(const RegressionMetrics& m) {
  py::dict d;
  d["sse"] = m.sse;
  d["rmse"] = m.rmse;
  d["r2"] = m.r2;
  d["r2_adj"] = m.r2_adj;
  d["n"] = m.n;
  d["p"] = m.p;
  return d;
}

AdjustedR2Convention convention_of(const std::string& name) {
  if (name == "n-minus-p") return AdjustedR2Convention::n_minus_p;
  if (name == "classical") return AdjustedR2Convention::classical;
  throw Error(ErrorKind::config, "adjusted_r2 must be n-minus-p or classical");
}

// Reports round-trip through their JSON text so Python sees plain dicts.
py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Elastic Net MOPSO feature selection with Pareto fusion.";

  m.attr("EnfuseError") = py::exception<Error>(m, "EnfuseError", PyExc_RuntimeError);
  py::register_local_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object type = py::module_::import("enfuse._core").attr("EnfuseError");
      const auto message = std::string(to_string(e.kind())) + ": " + e.what();
      PyErr_SetString(type.ptr(), message.c_str());
    }
  });

  py::class_<Dataset>(m, "Dataset")
      .def(py::init([](Eigen::MatrixXd x, Eigen::VectorXd y, std::vector<std::string> names, bool unit_range) {
             if (names.empty()) {
               for (Index j = 0; j < x.cols(); ++j) names.push_back("x" + std::to_string(j + 1));
             }
             std::vector<ColumnScaling> scaling(static_cast<std::size_t>(x.cols()), ColumnScaling{0.0, 1.0});
             return Dataset(std::move(x), std::move(y), std::move(names), std::move(scaling), "y", unit_range);
           }),
           py::arg("x"), py::arg("y"), py::arg("names") = std::vector<std::string>{}, py::arg("unit_range") = true)
      .def_property_readonly("x", &Dataset::x)
      .def_property_readonly("y", &Dataset::y)
      .def_property_readonly("n", &Dataset::n)
      .def_property_readonly("p", &Dataset::p)
      .def_property_readonly("feature_names", &Dataset::feature_names)
      .def_property_readonly("response_name", &Dataset::response_name);

  m.def(
      "load_split",
      [](const std::filesystem::path& csv, const std::filesystem::path& schema, double train_fraction,
         std::uint64_t seed) { return preprocess_split(load_csv(csv, load_schema(schema)), train_fraction, seed); },
      py::arg("csv"), py::arg("schema"), py::arg("train_fraction") = 0.7, py::arg("seed") = 0,
      "Read, clean, one-hot encode and split; scaling comes from the training rows.");

  py::class_<FoldPlan>(m, "FoldPlan")
      .def_readonly("k", &FoldPlan::k)
      .def_readonly("assignments", &FoldPlan::assignments);
  m.def("make_folds", &make_folds, py::arg("n"), py::arg("k") = 10, py::arg("seed") = 0);

  py::class_<ElasticNetFit>(m, "ElasticNetFit")
      .def_readonly("intercept", &ElasticNetFit::intercept)
      .def_readonly("coefficients", &ElasticNetFit::coefficients)
      .def_readonly("alpha", &ElasticNetFit::alpha)
      .def_readonly("lambda_", &ElasticNetFit::lambda)
      .def_readonly("iterations", &ElasticNetFit::iterations)
      .def_readonly("converged", &ElasticNetFit::converged)
      .def_readonly("objective", &ElasticNetFit::objective)
      .def("nonzero_count", &ElasticNetFit::nonzero_count, py::arg("threshold") = 1e-8);

  m.def(
      "fit_elastic_net",
      [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha, double lambda, double tol, int max_iter) {
        return fit_elastic_net(x, y, alpha, lambda, tol, max_iter);
      },
      py::arg("x"), py::arg("y"), py::arg("alpha"), py::arg("lambda_"), py::arg("tol") = 1e-6,
      py::arg("max_iter") = 10000);
  m.def(
      "fit_ols",
      [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
        const auto fit = fit_ols(x, y);
        return py::make_tuple(fit.intercept, fit.coefficients);
      },
      py::arg("x"), py::arg("y"), "Returns (intercept, coefficients).");
  m.def("lasso_null_lambda", &lasso_null_lambda, py::arg("x"), py::arg("y"));
  m.def(
      "rmse_cv",
      [](const Dataset& ds, std::vector<Index> subset, double alpha, double lambda, const FoldPlan& folds) {
        return rmse_cv(ds, subset, alpha, lambda, folds);
      },
      py::arg("ds"), py::arg("subset"), py::arg("alpha"), py::arg("lambda_"), py::arg("folds"));
  m.def(
      "extra_sum_of_squares",
      [](const Dataset& ds, std::vector<Index> base, Index added) { return extra_sum_of_squares(ds, base, added); },
      py::arg("ds"), py::arg("base"), py::arg("added"));
  m.def("adjusted_r2", [](double r2, Index n, Index p, const std::string& convention) {
        return adjusted_r2(r2, n, p, convention_of(convention));
      },
      py::arg("r2"), py::arg("n"), py::arg("p"), py::arg("convention") = "n-minus-p");

  py::class_<mopso::MopsoConfig>(m, "MopsoConfig")
      .def(py::init<>())
      .def_readwrite("swarm_size", &mopso::MopsoConfig::swarm_size)
      .def_readwrite("archive_size", &mopso::MopsoConfig::archive_size)
      .def_readwrite("max_iter", &mopso::MopsoConfig::max_iter)
      .def_readwrite("inertia", &mopso::MopsoConfig::inertia)
      .def_readwrite("c1_initial", &mopso::MopsoConfig::c1_initial)
      .def_readwrite("c2_initial", &mopso::MopsoConfig::c2_initial)
      .def_readwrite("mutation_rate", &mopso::MopsoConfig::mutation_rate)
      .def_readwrite("lambda_min", &mopso::MopsoConfig::lambda_min)
      .def_readwrite("lambda_max", &mopso::MopsoConfig::lambda_max)
      .def_readwrite("v_max", &mopso::MopsoConfig::v_max)
      .def_readwrite("seed", &mopso::MopsoConfig::seed)
      .def_readwrite("threads", &mopso::MopsoConfig::threads)
      .def("validate", &mopso::MopsoConfig::validate);

  py::class_<mopso::EvaluatedSolution>(m, "EvaluatedSolution")
      .def_property_readonly("features", &mopso::EvaluatedSolution::features)
      .def_readonly("lambda_", &mopso::EvaluatedSolution::lambda)
      .def_property_readonly("rmse_cv", [](const mopso::EvaluatedSolution& s) { return s.objectives.rmse_cv; })
      .def_property_readonly("cardinality", &mopso::EvaluatedSolution::cardinality)
      .def_readonly("crowding", &mopso::EvaluatedSolution::crowding);

  py::class_<mopso::ParetoArchive>(m, "ParetoArchive")
      .def_property_readonly("members", &mopso::ParetoArchive::members)
      .def_property_readonly("capacity", &mopso::ParetoArchive::capacity)
      .def("valid", &mopso::ParetoArchive::valid)
      .def("__len__", &mopso::ParetoArchive::size);

  m.def(
      "crowding_distances",
      [](const std::vector<std::pair<double, double>>& front) {
        std::vector<mopso::Objectives> objs;
        for (const auto& [a, b] : front) objs.push_back({a, b});
        return mopso::crowding_distances(objs);
      },
      py::arg("front"));
  m.def(
      "run_mopso",
      [](const Dataset& ds, const mopso::MopsoConfig& config, const FoldPlan& folds, double alpha) {
        py::gil_scoped_release release;
        return mopso::run(ds, config, folds, alpha).archive;
      },
      py::arg("ds"), py::arg("config"), py::arg("folds"), py::arg("alpha") = 0.5);

  m.def(
      "fuse",
      [](const mopso::ParetoArchive& archive, const Dataset& train, const Dataset& test, const FoldPlan& folds,
         const std::string& policy, double alpha, const std::string& convention, const std::string& label) {
        fusion::FuseOptions options;
        options.policy = fusion::SelectionPolicy::parse(policy);
        options.alpha = alpha;
        options.convention = convention_of(convention);
        const auto report = fusion::fuse(archive, train, test, folds, options);
        return json_to_py(report::fusion_json(report, train, {label, 0}));
      },
      py::arg("archive"), py::arg("train"), py::arg("test"), py::arg("folds"), py::arg("policy") = "partial-f:0.9",
      py::arg("alpha") = 0.5, py::arg("convention") = "n-minus-p", py::arg("label") = "data",
      "Fuses the archive; returns the report as a dict shaped like fusion.json.");
  m.def(
      "saw_scores",
      [](const std::vector<double>& weights, const Eigen::MatrixXd& ess) { return fusion::saw_scores(weights, ess); },
      py::arg("weights"), py::arg("ess"));

  m.def(
      "run_ga_lr",
      [](const Dataset& train, const Dataset& test, const FoldPlan& folds, double w_r, double w_p, int population,
         int generations, std::uint64_t seed) {
        benchmarks::GaConfig config;
        config.w_r = w_r;
        config.w_p = w_p;
        config.population_size = population;
        config.generations = generations;
        config.seed = seed;
        benchmarks::BenchmarkResult r;
        {
          py::gil_scoped_release release;
          r = benchmarks::run_ga_lr(train, test, config, folds);
        }
        py::dict d;
        d["selected"] = r.selected;
        d["best_fitness"] = r.best_fitness;
        d["fitness_history"] = r.fitness_history;
        d["train"] = to_dict(r.train);
        d["rmse_cv"] = r.train_cv.rmse;
        d["test"] = to_dict(r.test);
        return d;
      },
      py::arg("train"), py::arg("test"), py::arg("folds"), py::arg("w_r") = 0.5, py::arg("w_p") = 0.5,
      py::arg("population") = 50, py::arg("generations") = 100, py::arg("seed") = 0);
  m.def(
      "run_en_grid",
      [](const Dataset& train, const Dataset& test, const std::vector<double>& lambdas, double alpha,
         const FoldPlan& folds) {
        py::list out;
        for (const auto& r : benchmarks::run_en_grid(train, test, lambdas, alpha, folds)) {
          py::dict d;
          d["lambda_"] = r.lambda;
          d["selected"] = r.selected;
          d["degenerate"] = r.degenerate;
          d["train"] = to_dict(r.train);
          d["rmse_cv"] = r.train_cv.rmse;
          d["test"] = to_dict(r.test);
          out.append(d);
        }
        return out;
      },
      py::arg("train"), py::arg("test"), py::arg("lambdas"), py::arg("alpha"), py::arg("folds"));

  py::class_<stats::WilcoxonResult>(m, "WilcoxonResult")
      .def_readonly("statistic", &stats::WilcoxonResult::statistic)
      .def_readonly("p_value", &stats::WilcoxonResult::p_value)
      .def_readonly("n_effective", &stats::WilcoxonResult::n_effective)
      .def_readonly("exact", &stats::WilcoxonResult::exact);
  m.def(
      "wilcoxon",
      [](std::vector<double> a, std::vector<double> b, const std::string& alternative) {
        return stats::wilcoxon_signed_rank({"a", "b", std::move(a), std::move(b)}, stats::parse_alternative(alternative));
      },
      py::arg("a"), py::arg("b"), py::arg("alternative") = "two-sided");

  py::class_<synth::SynthSpec>(m, "SynthSpec")
      .def(py::init<>())
      .def_readwrite("n", &synth::SynthSpec::n)
      .def_readwrite("informative", &synth::SynthSpec::informative)
      .def_readwrite("noise", &synth::SynthSpec::noise)
      .def_readwrite("noise_sigma", &synth::SynthSpec::noise_sigma)
      .def_readwrite("coef_min", &synth::SynthSpec::coef_min)
      .def_readwrite("coef_max", &synth::SynthSpec::coef_max)
      .def_readwrite("intercept", &synth::SynthSpec::intercept)
      .def_readwrite("factors", &synth::SynthSpec::factors)
      .def_readwrite("factor_weight", &synth::SynthSpec::factor_weight)
      .def_readwrite("seed", &synth::SynthSpec::seed);
  m.def(
      "synth_split",
      [](const synth::SynthSpec& spec, double train_fraction, std::uint64_t split_seed) {
        const auto data = synth::generate(spec);
        auto [train, test] = preprocess_split(synth::to_raw_table(data), train_fraction, split_seed);
        return py::make_tuple(std::move(train), std::move(test), data.informative);
      },
      py::arg("spec"), py::arg("train_fraction") = 0.7, py::arg("split_seed") = 0,
      "Generates a planted dataset; returns (train, test, informative feature indices).");
  m.def("write_synth", [](const synth::SynthSpec& spec, const std::filesystem::path& dir) { synth::write(spec, dir); },
        py::arg("spec"), py::arg("dir"));
}
