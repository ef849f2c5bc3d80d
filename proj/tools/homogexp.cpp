#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "homog/catalog.hpp"
#include "homog/linear_cell.hpp"
#include "homog/nonlinear_effective.hpp"
#include "homog/report.hpp"
#include "homog/scenario.hpp"
#include "homog/study.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kAllFailed = 3, kAssert = 4 };

struct Common {
  std::string config;
  std::string out = ".";
  std::string scenario;
  int workers = 1;
  bool assert_mode = false;
  bool timing = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "Scenario config file")->required();
  sub->add_option("--out", c.out, "Output directory");
  sub->add_option("--scenario", c.scenario, "Run only the named scenario");
  sub->add_option("--workers", c.workers, "Parallel eps rows")->check(CLI::PositiveNumber);
  sub->add_flag("--assert", c.assert_mode, "Exit 4 when an acceptance threshold fails");
}

std::vector<homog::Scenario> selected(const Common& c) {
  auto all = homog::load_scenario_file(c.config);
  if (c.scenario.empty()) return all;
  for (const auto& s : all)
    if (s.name == c.scenario) return {s};
  throw homog::ConfigError("no scenario named '" + c.scenario + "' in " + c.config);
}

homog::SymMatrix parse_matrix(const std::string& text, int dim) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) v.push_back(homog::parse_number(tok));
  homog::SymMatrix M = homog::SymMatrix::Zero();
  if (dim == 1 && v.size() == 1) {
    M(0, 0) = v[0];
  } else if (dim == 2 && v.size() == 3) {
    M(0, 0) = v[0];
    M(1, 1) = v[1];
    M(0, 1) = M(1, 0) = v[2];
  } else {
    throw homog::ConfigError("--M needs " + std::string(dim == 1 ? "1 value" : "3 values m11,m22,m12"));
  }
  return M;
}

homog::Point parse_point(const std::string& text, const homog::Scenario& s) {
  if (text.empty()) return {(s.lower[0] + s.upper[0]) / 2, (s.lower[1] + s.upper[1]) / 2};
  std::vector<double> v;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) v.push_back(homog::parse_number(tok));
  if (int(v.size()) != s.dim) throw homog::ConfigError("--x needs one value per axis");
  return {v[0], s.dim == 2 ? v[1] : 0.0};
}

nlohmann::json matrix_json(const homog::SymMatrix& M, int dim) {
  if (dim == 1) return {M(0, 0)};
  return {M(0, 0), M(1, 1), M(0, 1)};
}

int report_checks(const std::vector<homog::Check>& checks) {
  int failed = 0;
  for (const auto& c : checks) {
    std::printf("%s %s: %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    if (!c.passed) ++failed;
  }
  return failed;
}

void print_rows(const homog::ConvergenceReport& rep) {
  for (const auto& r : rep.rows) {
    if (r.ok)
      std::printf("%s m=%d eps=%.6g error=%.4e residual=%.4e theta=%.4e\n", r.scenario.c_str(), r.m, r.eps,
                  r.error_sup, r.residual_sup, r.theta_sup);
    else
      std::printf("%s m=%d eps=%.6g FAILED: %s\n", r.scenario.c_str(), r.m, r.eps, r.diagnostic.c_str());
  }
  for (const auto& f : rep.slopes) {
    if (f.status == "insufficient rows") continue;
    if (f.slope)
      std::printf("%s m=%d slope %.3f (%s, predicted %.0f)\n", rep.scenario.c_str(), f.m, *f.slope, f.status.c_str(),
                  f.expected);
    else
      std::printf("%s m=%d slope unavailable (%s)\n", rep.scenario.c_str(), f.m, f.status.c_str());
  }
}

int run_cell(const Common& c, const std::string& M_text, const std::string& x_text) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : selected(c)) {
    homog::SymMatrix M = M_text.empty() ? homog::SymMatrix::Identity() : parse_matrix(M_text, s.dim);
    if (s.dim == 1) M(0, 1) = M(1, 0) = M(1, 1) = 0.0;
    nlohmann::json row = {{"scenario", s.name}, {"M", matrix_json(M, s.dim)}};
    if (s.kind == homog::ScenarioKind::Linear) {
      homog::CellOptions opt;
      opt.method = s.cell_method;
      opt.cross_validate = s.cross_validate;
      auto sol = homog::solve_cell_for_matrix(s.coefficient(), s.cell_grid(), M, opt);
      row["gamma"] = sol.gamma;
      row["residual"] = sol.residual;
      row["corrector_sup"] = homog::sup_norm(sol.w);
      if (sol.cross_check) row["cross_check"] = *sol.cross_check;
      std::printf("%s gamma=%.12g residual=%.2e\n", s.name.c_str(), sol.gamma, sol.residual);
    } else {
      homog::NonlinearCellOptions opt;
      opt.method = s.cell_method;
      opt.cross_validate = s.cross_validate;
      auto F = s.op();
      homog::NonlinearCell cell(F, s.cell_grid(), opt);
      homog::Point x = parse_point(x_text, s);
      auto smp = cell.sample(M, x);
      row["x"] = s.dim == 1 ? nlohmann::json{x[0]} : nlohmann::json{x[0], x[1]};
      row["F_bar"] = smp.F_bar;
      row["dF_dp"] = matrix_json(smp.dF_dp, s.dim);
      row["residual"] = smp.residual;
      row["newton_iterations"] = smp.newton_iterations;
      row["corrector_sup"] = homog::sup_norm(smp.w);
      if (smp.cross_check) row["cross_check"] = *smp.cross_check;
      std::printf("%s F_bar=%.12g residual=%.2e\n", s.name.c_str(), smp.F_bar, smp.residual);
    }
    out.push_back(row);
  }
  homog::write_text(c.out, "cell.json", out.dump(2) + "\n");
  return kOk;
}

int run_effective(const Common& c) {
  std::vector<homog::ConvergenceReport> reports;
  for (const auto& s : selected(c)) {
    homog::ConvergenceReport rep;
    rep.scenario = s.name;
    rep.kind = s.kind_name();
    rep.tensors = homog::effective_table(s);
    std::printf("%s: %zu table rows\n", s.name.c_str(), rep.tensors.size());
    reports.push_back(std::move(rep));
  }
  homog::write_text(c.out, "tensors.json", homog::tensors_json(reports).dump(2) + "\n");
  return kOk;
}

int run_correctors(const Common& c) {
  nlohmann::json out = nlohmann::json::array();
  std::vector<homog::ConvergenceReport> reports;
  for (const auto& s : selected(c)) {
    homog::StudyOptions opt;
    opt.setup_only = true;
    auto rep = homog::run_convergence_study(s, opt);
    out.push_back({{"scenario", s.name}, {"kind", rep.kind}, {"summary", rep.summary}});
    std::printf("%s: %s\n", s.name.c_str(), rep.summary.dump().c_str());
    reports.push_back(std::move(rep));
  }
  homog::write_text(c.out, "hierarchy.json", out.dump(2) + "\n");
  homog::write_text(c.out, "tensors.json", homog::tensors_json(reports).dump(2) + "\n");
  return kOk;
}

int run_sweep(const Common& c, std::optional<double> eps) {
  std::vector<homog::ConvergenceReport> reports;
  for (const auto& s : selected(c)) {
    if (eps && !(*eps > 0.0 && *eps <= s.eps_max))
      throw homog::ConfigError("epsilon out of range: --eps must lie in (0, eps_max]");
    homog::StudyOptions opt;
    opt.workers = c.workers;
    opt.only_eps = eps;
    reports.push_back(homog::run_convergence_study(s, opt));
    print_rows(reports.back());
  }
  homog::write_reports(c.out, reports, c.timing);
  bool all_failed = true;
  for (const auto& r : reports) all_failed = all_failed && r.all_failed();
  if (all_failed) {
    std::fprintf(stderr, "every eps row failed\n");
    return kAllFailed;
  }
  if (c.assert_mode) {
    int failed = 0;
    for (const auto& r : reports) {
      auto checks = homog::assert_report(r);
      // A single eps has no slope or monotonicity to check.
      if (eps)
        std::erase_if(checks, [](const homog::Check& k) {
          return k.name.find(" slope ") != std::string::npos || k.name.find(" monotone ") != std::string::npos;
        });
      failed += report_checks(checks);
    }
    if (failed) return kAssert;
  }
  return kOk;
}

int run_verify(const Common& c) {
  int failed = 0;
  for (const auto& s : selected(c)) failed += report_checks(homog::verify_scenario(s));
  return failed && c.assert_mode ? kAssert : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-scale expansion experiments for periodic elliptic problems"};
  app.require_subcommand(1);
  Common c;
  std::string M_text, x_text;
  std::string eps_text;

  auto* cell = app.add_subcommand("cell", "Solve one cell problem");
  add_common(cell, c);
  cell->add_option("--M", M_text, "Hessian: m11 (1D) or m11,m22,m12 (2D); default identity");
  cell->add_option("--x", x_text, "Slow variable for nonlinear operators; default domain centre");

  auto* effective = app.add_subcommand("effective", "Effective tensor or F_bar tables");
  add_common(effective, c);

  auto* correctors = app.add_subcommand("correctors", "Build the corrector hierarchy");
  add_common(correctors, c);

  auto* solve_eps = app.add_subcommand("solve-eps", "Expansion error at a single eps");
  add_common(solve_eps, c);
  solve_eps->add_option("--eps", eps_text, "Oscillation scale, e.g. 1/16")->required();
  solve_eps->add_flag("--timing", c.timing, "Fill the wall_ms column");

  auto* converge = app.add_subcommand("converge", "Full eps sweep with slope fits");
  add_common(converge, c);
  converge->add_flag("--timing", c.timing, "Fill the wall_ms column");

  auto* verify = app.add_subcommand("verify", "Structural invariant suite");
  add_common(verify, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (cell->parsed()) return run_cell(c, M_text, x_text);
    if (effective->parsed()) return run_effective(c);
    if (correctors->parsed()) return run_correctors(c);
    if (solve_eps->parsed()) return run_sweep(c, homog::parse_number(eps_text));
    if (converge->parsed()) return run_sweep(c, std::nullopt);
    if (verify->parsed()) return run_verify(c);
  } catch (const homog::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const homog::AdmissibilityError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kAllFailed;
  }
  return kOk;
}
