#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rtreserve/config.hpp"
#include "rtreserve/distributions.hpp"
#include "rtreserve/kernels.hpp"
#include "rtreserve/learners.hpp"
#include "rtreserve/simulator.hpp"
#include "rtreserve/surrogate.hpp"

namespace py = pybind11;
using namespace rtreserve;

namespace {

std::unique_ptr<Learner> build_learner(const std::string& kind, double nu, double alpha,
                                       double sigma0, double alpha_sigma,
                                       std::optional<std::pair<double, double>> projection,
                                       std::optional<double> r0, double support_max,
                                       std::size_t initial_cells) {
  LearnerConfig config;
  config.kind = parse_learner_kind(kind);
  config.step = {nu, alpha};
  config.kernel = {sigma0, alpha_sigma};
  if (projection) config.projection = Interval{projection->first, projection->second};
  config.r0 = r0;
  config.discrete_initial_cells = initial_cells;
  return make_learner(config, support_max);
}

// Runs a config given as text and returns plain Python containers.
py::dict run_config(const std::string& text, const std::vector<std::string>& overrides,
                    unsigned jobs) {
  auto map = parse_config(text);
  for (const auto& o : overrides) apply_override(map, o);
  const auto settings = build_settings(map);

  ExperimentResult result;
  {
    py::gil_scoped_release release;
    result = run_experiment(settings.experiment, jobs);
  }

  py::list optima;
  for (const auto& o : result.optima) optima.append(py::make_tuple(o.reserve, o.revenue));
  py::list runs;
  for (const auto& run : result.runs) {
    std::vector<std::uint64_t> t;
    std::vector<double> reserve, gap, sq;
    for (const auto& rec : run.records) {
      t.push_back(rec.t);
      reserve.push_back(rec.reserve);
      gap.push_back(rec.expected_gap);
      sq.push_back(rec.sq_error);
    }
    py::dict d;
    d["seed"] = run.seed;
    d["t"] = t;
    d["reserve"] = reserve;
    d["expected_gap"] = gap;
    d["sq_error"] = sq;
    d["dynamic_regret"] = run.dynamic_regret;
    d["phase_regret"] = run.phase_regret;
    runs.append(d);
  }
  py::dict out;
  out["optima"] = optima;
  out["runs"] = runs;
  return out;
}

}  // namespace

PYBIND11_MODULE(_rtreserve, m) {
  m.doc() = "Online reserve price learning with convolved revenue surrogates";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<BidDistribution>(m, "BidDistribution")
      .def_static("kumaraswamy", &BidDistribution::kumaraswamy, py::arg("a"), py::arg("b"))
      .def_static("uniform", &BidDistribution::uniform, py::arg("upper") = 1.0)
      .def_static("truncated_exponential", &BidDistribution::truncated_exponential,
                  py::arg("rate"), py::arg("upper"))
      .def("cdf", &BidDistribution::cdf)
      .def("survival", &BidDistribution::survival)
      .def("pdf", &BidDistribution::pdf)
      .def("quantile", &BidDistribution::quantile)
      .def("upper_quantile", &BidDistribution::upper_quantile)
      .def_property_readonly("support_max", &BidDistribution::support_max)
      .def("__repr__", &BidDistribution::describe);

  m.def("monopoly_revenue", &monopoly_revenue, py::arg("dist"), py::arg("r"));
  m.def(
      "monopoly_price",
      [](const BidDistribution& d, double tol) {
        const auto p = monopoly_price_oracle(d, tol);
        return py::make_tuple(p.reserve, p.revenue);
      },
      py::arg("dist"), py::arg("tol") = 1e-7, "Returns (r*, Π(r*)).");

  py::class_<GaussianKernel>(m, "GaussianKernel")
      .def(py::init<double>(), py::arg("sigma"))
      .def_property_readonly("sigma", &GaussianKernel::sigma)
      .def("density", &GaussianKernel::density)
      .def("cdf", &GaussianKernel::cdf);

  m.def("convolved_payoff",
        [](const GaussianKernel& k, double r, double b) { return convolved_payoff(k, r, b); },
        py::arg("kernel"), py::arg("r"), py::arg("b"));
  m.def("convolved_gradient",
        [](const GaussianKernel& k, double r, double b) { return convolved_gradient(k, r, b); },
        py::arg("kernel"), py::arg("r"), py::arg("b"));
  m.def("convolved_expected_revenue",
        [](const BidDistribution& d, const GaussianKernel& k, double r) {
          return convolved_expected_revenue(d, k, r);
        },
        py::arg("dist"), py::arg("kernel"), py::arg("r"));

  py::class_<Learner>(m, "Learner")
      .def_property_readonly("reserve", &Learner::reserve)
      .def_property_readonly("step", &Learner::step)
      .def_property_readonly("kind", [](const Learner& l) { return std::string(to_string(l.kind())); })
      .def("observe", &Learner::observe, py::arg("bid"))
      .def("observe_all",
           [](Learner& l, const std::vector<double>& bids) { l.observe_all(bids); },
           py::arg("bids"))
      .def("reserve_path",
           [](Learner& l, const std::vector<double>& bids) { return reserve_path(l, bids); },
           py::arg("bids"), "Reserves posted before each bid; advances the learner.");

  m.def("make_learner", &build_learner, py::arg("kind"), py::arg("nu") = 1.0,
        py::arg("alpha") = 1.0, py::arg("sigma0") = 1.0, py::arg("alpha_sigma") = 0.5,
        py::arg("projection") = py::none(), py::arg("r0") = py::none(),
        py::arg("support_max") = 1.0, py::arg("initial_cells") = 1);

  m.def("run_config", &run_config, py::arg("text"),
        py::arg("overrides") = std::vector<std::string>{}, py::arg("jobs") = 1);
}
