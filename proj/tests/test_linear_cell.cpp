#include <doctest.h>

#include <cmath>

#include "homog/catalog.hpp"
#include "homog/linear_cell.hpp"

using namespace homog;

namespace {

// 1 / mean(1 / a) by the periodic trapezoid rule.
double harmonic_mean(const ScalarFunction& a, int n = 1 << 16) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += 1.0 / a({double(i) / n, 0.0});
  return n / s;
}

}  // namespace

TEST_CASE("1D effective coefficient is the harmonic mean") {
  auto fn = parse_function("shifted_cosine(0.5, 2)");
  auto t = effective_matrix(CoefficientField::scalar(fn), TorusGrid(1, 512));
  CHECK(t.a_bar({0, 0}) == doctest::Approx(harmonic_mean(fn)).epsilon(1e-6));
}

TEST_CASE("layered coefficients: the invariant measure is 1/a11 normalised") {
  auto a = parse_function("shifted_sine(1, 2, 0)");
  // diag(a(y0), 2): a_bar = diag(harmonic mean of a, 2).
  auto t = effective_matrix(CoefficientField::entries(a, constant_function(2.0)), TorusGrid(2, 64));
  SymMatrix ab = t.a_bar_matrix();
  CHECK(ab(0, 0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-5));
  CHECK(ab(1, 1) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(std::abs(ab(0, 1)) < 1e-10);
  // a(y0) I: both diagonal entries are the harmonic mean.
  SymMatrix iso = effective_matrix(CoefficientField::entries(a, a), TorusGrid(2, 64)).a_bar_matrix();
  CHECK(iso(0, 0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-5));
  CHECK(iso(1, 1) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-5));
}

TEST_CASE("direct and penalised cell solves agree") {
  auto A = CoefficientField::scalar(parse_function("shifted_sine(1, 2)"));
  TorusGrid g(1, 256);
  CellOptions direct;
  CellOptions sched;
  sched.method = CellMethod::DeltaSchedule;
  SymMatrix M = SymMatrix::Identity();
  auto d = solve_cell_for_matrix(A, g, M, direct);
  auto s = solve_cell_for_matrix(A, g, M, sched);
  CHECK(d.gamma == doctest::Approx(s.gamma).epsilon(1e-9));
  CHECK(d.w[0] == 0.0);
  CHECK(d.residual < 1e-9);
  CHECK(sup_diff(d.w, s.w) < 1e-7);
  CHECK_FALSE(s.gamma_estimates.empty());

  CellOptions cross;
  cross.cross_validate = true;
  auto c = solve_cell_for_matrix(A, g, M, cross);
  REQUIRE(c.cross_check.has_value());
  CHECK(*c.cross_check < 1e-8);
}

TEST_CASE("penalised solution approaches the effective value") {
  auto A = CoefficientField::scalar(parse_function("shifted_sine(1, 2)"));
  TorusGrid g(1, 256);
  GridField rhs = A.entry(g, 0, 0);
  auto d = solve_cell(A, rhs);
  auto p = solve_penalized_cell(A, rhs, 1e-4);
  CHECK(p.delta_w0 == doctest::Approx(d.gamma).epsilon(1e-3));
}

TEST_CASE("delta schedules") {
  auto h = DeltaSchedule::halving(2, 5);
  REQUIRE(h.deltas.size() == 4);
  CHECK(h.deltas.front() == doctest::Approx(0.25));
  auto t = DeltaSchedule::thirding(1, 3);
  REQUIRE(t.deltas.size() == 3);
  CHECK(t.deltas.back() == doctest::Approx(1.0 / 27));
}

TEST_CASE("higher-order tensors") {
  CHECK(index_tuples(2, 3).size() == 8);
  CHECK(index_tuples(1, 4).size() == 1);
  auto A = CoefficientField::scalar(parse_function("shifted_sine(1, 2)"));
  auto t = chi_recursion(A, TorusGrid(1, 512), 4);
  CHECK(std::abs(t.a_bar({0, 0, 0})) < 1e-8);
  CHECK(std::isfinite(t.a_bar({0, 0, 0, 0})));
  CHECK(sup_norm(t.chi({0})) == 0.0);
  CHECK(sup_norm(t.chi({})) == doctest::Approx(1.0));
  for (const auto& [idx, e] : t.entries()) CHECK(e.residual < 1e-8);
}

TEST_CASE("constant coefficient has vanishing correctors") {
  auto A = CoefficientField::scalar(constant_function(2.0));
  auto t = chi_recursion(A, TorusGrid(1, 64), 3);
  CHECK(t.a_bar({0, 0}) == doctest::Approx(2.0));
  CHECK(sup_norm(t.chi({0, 0})) < 1e-12);
  CHECK(std::abs(t.a_bar({0, 0, 0})) < 1e-12);
}
