#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "homog/scenario.hpp"

namespace homog {

struct StudyRow {
  std::string scenario;
  std::string kind;
  int m = 2;
  double eps = 0.0;
  bool ok = false;
  std::string diagnostic;  // set when the row failed
  double error_sup = 0.0;
  double residual_sup = 0.0;  // sup |operator(eta + theta) - source|
  double theta_sup = 0.0;
  double wall_ms = 0.0;
  /// Discretisation floor estimate for this row's error.
  double floor = 0.0;
  nlohmann::json details;
};

struct SlopeFit {
  int m = 2;
  std::optional<double> slope;
  /// "ok", "floor-limited" or "insufficient rows".
  std::string status;
  double expected = 0.0;
};

struct ConvergenceReport {
  std::string scenario;
  std::string kind;
  std::vector<StudyRow> rows;  // m ascending, eps descending within m
  std::vector<SlopeFit> slopes;
  nlohmann::json summary;  // tensor / hierarchy norms
  nlohmann::json tensors;  // rows for tensors.json
  bool all_failed() const;
};

struct StudyOptions {
  int workers = 1;
  /// Restrict to one eps value (solve-eps).
  std::optional<double> only_eps;
  /// Build tensors and hierarchies only; no rows.
  bool setup_only = false;
};

/// Sweeps every (m, eps) pair of the scenario. Rows run as parallel tasks;
/// a failing row records its diagnostic and the others continue.
ConvergenceReport run_convergence_study(const Scenario& scenario, const StudyOptions& options = {});

/// Least-squares slope of log(error) against log(eps). Needs >= 3 points with
/// positive eps and error.
double fit_slope(const std::vector<std::pair<double, double>>& eps_error);
/// Same over the successful rows.
double fit_slope(const std::vector<StudyRow>& rows);

/// Predicted rate: m - 1 (linear) or [m/2] (nonlinear).
double expected_rate(const std::string& kind, int m);

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Threshold checks behind --assert: slope within 0.3 of the predicted rate
/// (or floor-limited), errors decreasing below eps = 1/8, barrier passing.
std::vector<Check> assert_report(const ConvergenceReport& report);

/// Structural invariants of one scenario: tensor symmetry and ellipticity,
/// cell-method agreement, the 1D third-order identity, operator audits,
/// concavity of F_bar and derivative consistency.
std::vector<Check> verify_scenario(const Scenario& scenario);

/// Tensor table (linear) or F_bar table (nonlinear) in the tensors.json layout.
nlohmann::json effective_table(const Scenario& scenario);

}  // namespace homog
