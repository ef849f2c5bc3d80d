#pragma once

#include <optional>
#include <string>
#include <vector>

#include "homog/catalog.hpp"
#include "homog/coefficient.hpp"
#include "homog/linear_cell.hpp"
#include "homog/nonlinear_operator.hpp"

namespace homog {

enum class ScenarioKind { Linear, Nonlinear };

struct BranchSpec {
  ScalarFunction a11, a22, a12, f;
  bool has_a12 = false;
};

/// One study: coefficients or operator from the catalog, domain, grids and
/// the eps sweep.
///
/// Config syntax (one or more sections):
///
///   [scenario NAME]
///   kind = linear | nonlinear
///   dim = 1 | 2
///   a = shifted_sine(1, 2)          # 1D coefficient; 2D uses a11, a22, a12
///   f = exponential(1, 1)
///   g = constant(0)
///   m = 2, 3
///   eps = 1/8, 1/16, 1/32, 1/64
///   eps_max = 1/8
///   form = sqrt_concave | min_of_linear | linear   (nonlinear only)
///   curvature = constant(0.5)                      (sqrt_concave)
///   branch1.a = ..., branch1.f = ..., branch2.a = ...  (min_of_linear)
struct Scenario {
  std::string name;
  ScenarioKind kind = ScenarioKind::Linear;
  int dim = 1;
  ScalarFunction a11, a22, a12;
  bool has_a12 = false;
  ScalarFunction f, g;
  OperatorForm form = OperatorForm::Linear;
  ScalarFunction curvature;
  std::vector<BranchSpec> branches;
  std::vector<int> orders{2};
  std::vector<double> eps;
  double eps_max = 0.0;
  Point lower{0.0, 0.0}, upper{1.0, 1.0};
  int points_per_period = 32;
  int min_points_per_period = 16;
  int cell_nodes = 256;
  int effective_nodes = 256;
  CellMethod cell_method = CellMethod::Direct;
  bool cross_validate = false;

  CoefficientField coefficient() const;
  NonlinearOperator op() const;
  BoxGrid effective_grid() const;
  TorusGrid cell_grid() const;
  std::string kind_name() const { return kind == ScenarioKind::Linear ? "linear" : "nonlinear"; }
};

/// Parses every section; throws ConfigError carrying the line number.
std::vector<Scenario> load_scenarios(const std::string& text);
/// First section of `text`.
Scenario load_scenario(const std::string& text);
std::vector<Scenario> load_scenario_file(const std::string& path);

}  // namespace homog
