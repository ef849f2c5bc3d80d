#include <doctest.h>

#include <cmath>
#include <string>

#include "homog/report.hpp"
#include "homog/scenario.hpp"
#include "homog/study.hpp"

using namespace homog;

namespace {

const char* kMinimal = R"(
# comment line
[scenario minimal]
kind = linear
a = shifted_sine(1, 2)   # trailing comment
f = exponential(1, 1)
m = 2
eps = [1/8, 1/16, 1/32, 1/64]
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  auto p = s.find(from);
  REQUIRE(p != std::string::npos);
  return s.replace(p, from.size(), to);
}

std::string error_of(const std::string& text) {
  try {
    load_scenarios(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal linear config") {
  Scenario s = load_scenario(kMinimal);
  CHECK(s.name == "minimal");
  CHECK(s.kind == ScenarioKind::Linear);
  CHECK(s.dim == 1);
  CHECK(s.orders == std::vector<int>{2});
  REQUIRE(s.eps.size() == 4);
  CHECK(s.eps[3] == doctest::Approx(1.0 / 64));
  CHECK(s.eps_max == doctest::Approx(1.0 / 8));
  CHECK(s.coefficient()({0.25, 0})(0, 0) == doctest::Approx(3.0));
}

TEST_CASE("config validation errors") {
  CHECK(error_of(replace(kMinimal, "eps = [1/8, 1/16, 1/32, 1/64]", "eps = 1.5, 1/16")).find("epsilon out of range") !=
        std::string::npos);
  CHECK(error_of(replace(kMinimal, "eps = [1/8, 1/16, 1/32, 1/64]", "eps = 1/16, 1/8")).find("epsilon out of range") !=
        std::string::npos);
  CHECK(error_of(replace(kMinimal, "m = 2", "m = 2\neps_max = 1/16")).find("epsilon out of range") !=
        std::string::npos);
  CHECK(error_of(replace(kMinimal, "m = 2", "colour = red")) == "line 7: unknown key 'colour'");
  CHECK(error_of(replace(kMinimal, "m = 2", "m = 1")).find("line 7") != std::string::npos);
  CHECK(error_of(replace(kMinimal, "a = shifted_sine(1, 2)", "a = shifted_sine(3, 2)")).find("minimal") !=
        std::string::npos);
  CHECK(error_of(replace(kMinimal, "f = exponential(1, 1)", "f = wobble(1)")).find("line 6: f:") != std::string::npos);
  CHECK(error_of(replace(kMinimal, "m = 2", "m = 2\nm = 3")).find("duplicate key") != std::string::npos);
  CHECK(error_of("kind = linear\n").find("outside") != std::string::npos);
  CHECK(error_of(replace(kMinimal, "eps = [1/8, 1/16, 1/32, 1/64]", "")).find("missing 'eps'") != std::string::npos);
  CHECK(error_of(kMinimal + std::string("[scenario minimal]\n")).find("duplicate scenario") != std::string::npos);
}

TEST_CASE("nonlinear min_of_linear config with two branches") {
  auto list = load_scenarios(std::string(kMinimal) + R"(
[scenario two_branches]
kind = nonlinear
form = min_of_linear
branch1.a = shifted_sine(1, 2)
branch1.f = constant(1)
branch2.a = shifted_cosine(1, 2.5)
branch2.f = constant(1)
eps = 1/8, 1/16
)");
  REQUIRE(list.size() == 2);
  const Scenario& s = list[1];
  CHECK(s.kind == ScenarioKind::Nonlinear);
  CHECK(s.form == OperatorForm::MinOfLinear);
  CHECK(s.branches.size() == 2);
  CHECK(s.op().form() == OperatorForm::MinOfLinear);
  CHECK_THROWS_AS(s.coefficient(), ConfigError);
}

TEST_CASE("2D config") {
  Scenario s = load_scenario(R"(
[scenario plane]
kind = linear
dim = 2
a11 = shifted_sine(0.5, 2, 0)
a22 = constant(2)
a12 = sine_product(0.2, 0)
f = constant(1)
domain = 0, 1, 0, 2
eps = 1/4
)");
  CHECK(s.dim == 2);
  CHECK(s.upper[1] == 2.0);
  CHECK(s.effective_grid().dim == 2);
  CHECK(error_of("[scenario p]\ndim = 2\na = constant(1)\nf = constant(1)\neps = 1/4\n").find("a11") !=
        std::string::npos);
}

TEST_CASE("slope fit") {
  CHECK(fit_slope({{1e-1, 1e-1}, {1e-2, 1e-2}, {1e-3, 1e-3}}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit_slope({{1.0 / 8, 1e-2}, {1.0 / 16, 2.5e-3}, {1.0 / 32, 6.25e-4}}) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(fit_slope({{1.0 / 8, 3e-3}, {1.0 / 16, 3e-3}, {1.0 / 32, 3e-3}})) < 1e-12);
  CHECK_THROWS_AS(fit_slope({{1.0 / 8, 1e-2}, {1.0 / 16, 1e-3}}), Error);
  CHECK_THROWS_AS(fit_slope({{1.0 / 8, 1e-2}, {1.0 / 16, 0.0}, {1.0 / 32, 1e-3}}), Error);
  CHECK(expected_rate("linear", 3) == 2.0);
  CHECK(expected_rate("nonlinear", 3) == 1.0);
}

TEST_CASE("CSV layout and failed rows") {
  ConvergenceReport rep;
  rep.scenario = "s";
  rep.kind = "linear";
  StudyRow ok;
  ok.scenario = "s";
  ok.kind = "linear";
  ok.eps = 0.125;
  ok.ok = true;
  ok.error_sup = 1e-3;
  ok.residual_sup = 2e-3;
  ok.theta_sup = 3e-3;
  ok.wall_ms = 12.5;
  StudyRow bad = ok;
  bad.eps = 0.0625;
  bad.ok = false;
  bad.diagnostic = "solver failed";
  rep.rows = {ok, bad};
  CHECK(report_csv({rep}) ==
        "scenario,kind,m,epsilon,error_sup,residual_sup,theta_sup,wall_ms\n"
        "s,linear,2,1.250000000e-01,1.000000000e-03,2.000000000e-03,3.000000000e-03,\n"
        "s,linear,2,6.250000000e-02,,,,\n");
  CHECK(report_csv({rep}, true).find(",12.5\n") != std::string::npos);
  auto j = report_json({rep});
  CHECK(j["reports"][0]["rows"][1]["diagnostic"] == "solver failed");
  CHECK(j["reports"][0]["rows"][0]["wall_ms"].is_null());
  CHECK_FALSE(rep.all_failed());
}

TEST_CASE("study rows are ordered and independent of the worker count") {
  Scenario s = load_scenario(replace(replace(kMinimal, "m = 2", "m = 2, 3\ncell_nodes = 128\neffective_nodes = 256"),
                                     "eps = [1/8, 1/16, 1/32, 1/64]", "eps = 1/8, 1/16, 1/32"));
  StudyOptions one, three;
  three.workers = 3;
  auto a = run_convergence_study(s, one);
  auto b = run_convergence_study(s, three);
  REQUIRE(a.rows.size() == 6);
  CHECK(a.rows[0].m == 2);
  CHECK(a.rows[0].eps > a.rows[1].eps);
  CHECK(a.rows[3].m == 3);
  CHECK(report_csv({a}) == report_csv({b}));
  CHECK(a.slopes.size() == 2);
  CHECK(a.slopes[0].status == "ok");
  CHECK(a.tensors.size() == 2);  // orders 2 and 3 in 1D
}

TEST_CASE("constant coefficients are floor-limited") {
  Scenario s = load_scenario(replace(replace(kMinimal, "a = shifted_sine(1, 2)", "a = constant(2)"), "m = 2",
                                     "m = 2\ncell_nodes = 16\neffective_nodes = 512"));
  auto rep = run_convergence_study(s);
  REQUIRE(rep.slopes.size() == 1);
  CHECK(rep.slopes[0].status == "floor-limited");
  for (const auto& c : assert_report(rep)) CHECK(c.passed);
}

TEST_CASE("assert checks catch a shallow slope and a failed row") {
  ConvergenceReport rep;
  rep.scenario = "s";
  rep.kind = "linear";
  for (double e : {0.125, 0.0625, 0.03125}) {
    StudyRow r;
    r.scenario = "s";
    r.kind = "linear";
    r.m = 3;
    r.eps = e;
    r.ok = true;
    r.error_sup = e;
    rep.rows.push_back(r);
  }
  rep.slopes.push_back({3, 1.0, "ok", 2.0});
  auto checks = assert_report(rep);
  bool slope_failed = false;
  for (const auto& c : checks)
    if (c.name.find("slope") != std::string::npos) slope_failed = !c.passed;
  CHECK(slope_failed);
  rep.rows[1].ok = false;
  rep.rows[1].diagnostic = "boom";
  int failed = 0;
  for (const auto& c : assert_report(rep)) failed += !c.passed;
  CHECK(failed >= 2);
}
