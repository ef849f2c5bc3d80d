#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "homog/catalog.hpp"
#include "homog/linear_cell.hpp"
#include "homog/report.hpp"
#include "homog/scenario.hpp"
#include "homog/study.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_homog, m) {
  m.doc() = "Two-scale expansion experiments (native core)";

  // Translators run newest first, so the base class goes in before ConfigError.
  auto& base = py::register_exception<homog::Error>(m, "HomogError", PyExc_RuntimeError);
  py::register_exception<homog::ConfigError>(m, "ConfigError", base.ptr());

  py::class_<homog::Scenario>(m, "Scenario")
      .def_readonly("name", &homog::Scenario::name)
      .def_property_readonly("kind", &homog::Scenario::kind_name)
      .def_readonly("dim", &homog::Scenario::dim)
      .def_readonly("orders", &homog::Scenario::orders)
      .def_readonly("eps", &homog::Scenario::eps)
      .def_readonly("eps_max", &homog::Scenario::eps_max)
      .def_readonly("points_per_period", &homog::Scenario::points_per_period)
      .def_readonly("cell_nodes", &homog::Scenario::cell_nodes)
      .def_readonly("effective_nodes", &homog::Scenario::effective_nodes)
      .def("__repr__", [](const homog::Scenario& s) { return "<Scenario " + s.name + " (" + s.kind_name() + ")>"; });

  m.def("load_scenarios", &homog::load_scenarios, py::arg("text"));
  m.def("load_scenario", &homog::load_scenario, py::arg("text"));
  m.def("load_scenario_file", &homog::load_scenario_file, py::arg("path"));

  m.def(
      "run_study_json",
      [](const homog::Scenario& s, int workers, bool timing) {
        homog::StudyOptions opt;
        opt.workers = workers;
        homog::ConvergenceReport rep;
        {
          py::gil_scoped_release release;
          rep = homog::run_convergence_study(s, opt);
        }
        return homog::report_json({rep}, timing).dump();
      },
      py::arg("scenario"), py::arg("workers") = 1, py::arg("timing") = false);
  m.def(
      "report_csv",
      [](const homog::Scenario& s, int workers) {
        homog::StudyOptions opt;
        opt.workers = workers;
        py::gil_scoped_release release;
        return homog::report_csv({homog::run_convergence_study(s, opt)});
      },
      py::arg("scenario"), py::arg("workers") = 1);
  m.def(
      "effective_table_json", [](const homog::Scenario& s) { return homog::effective_table(s).dump(); },
      py::arg("scenario"));
  m.def(
      "verify",
      [](const homog::Scenario& s) {
        std::vector<std::tuple<std::string, bool, std::string>> out;
        for (const auto& c : homog::verify_scenario(s)) out.emplace_back(c.name, c.passed, c.detail);
        return out;
      },
      py::arg("scenario"));

  m.def(
      "fit_slope",
      [](const std::vector<double>& eps, const std::vector<double>& error) {
        if (eps.size() != error.size()) throw homog::ConfigError("eps and error lengths differ");
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < eps.size(); ++i) pts.emplace_back(eps[i], error[i]);
        return homog::fit_slope(pts);
      },
      py::arg("eps"), py::arg("error"));

  m.def(
      "evaluate_function",
      [](const std::string& text, double x, double y) { return homog::parse_function(text)({x, y}); },
      py::arg("text"), py::arg("x"), py::arg("y") = 0.0);

  m.def(
      "effective_coefficient_1d",
      [](const std::string& a, int nodes) {
        auto A = homog::CoefficientField::scalar(homog::parse_function(a));
        return homog::effective_matrix(A, homog::TorusGrid(1, nodes)).a_bar_matrix()(0, 0);
      },
      py::arg("a"), py::arg("nodes") = 1024);
}
