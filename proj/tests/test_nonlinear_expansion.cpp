#include <doctest.h>

#include <cmath>
#include <memory>

#include "homog/catalog.hpp"
#include "homog/effective_solver.hpp"
#include "homog/nonlinear_expansion.hpp"

using namespace homog;

TEST_CASE("nonlinear effective solve of a linear operator matches the linear solve") {
  auto A = CoefficientField::scalar(parse_function("shifted_sine(1, 2)"));
  auto f = parse_function("exponential(1, 1)");
  auto F = NonlinearOperator::linear(A, f);
  NonlinearCell cell(F, TorusGrid(1, 128));
  EffectiveOperator F_bar(cell, std::make_shared<EffectiveCache>());
  BoxGrid eff(1, {0, 0}, {1, 0}, {128, 0});
  NewtonReport rep;
  GridField u_nl = solve_effective_nl(F_bar, GridField(eff), {1e-9, 60, 30, false}, &rep);
  CHECK(rep.converged);
  SymMatrix a_bar = effective_matrix(A, TorusGrid(1, 128)).a_bar_matrix();
  GridField u_lin = solve_effective_dirichlet(a_bar, sample_box(eff, f), GridField(eff));
  CHECK(sup_diff(u_nl, u_lin) < 1e-8);
  CHECK(F_bar.cache()->size() > 0);

  auto h = build_hierarchy(F_bar, u_nl);
  CHECK(h.depth == 2);
  const auto& chi = h.chi[0];
  const auto& d2u = h.u_derivatives.get({2, 0});
  double gap = 0.0, scale = 0.0;
  for (std::size_t q = 0; q < eff.size(); q += 7)
    for (std::size_t p = 0; p < h.cell.size(); p += 5) {
      gap = std::max(gap, std::abs(h.w[2].at(p, q) - chi.at(p, q) * d2u[q]));
      scale = std::max(scale, std::abs(h.w[2].at(p, q)));
    }
  CHECK(gap <= 1e-8 * (1.0 + scale));
  CHECK(sup_norm(h.w[1].values()) == 0.0);
}

TEST_CASE("sqrt_concave expansion at one eps passes the barrier check") {
  auto A = CoefficientField::scalar(parse_function("shifted_sine(1, 2)"));
  auto F = NonlinearOperator::sqrt_concave(A, constant_function(0.5), parse_function("exponential(1, 1)"));
  NonlinearCell cell(F, TorusGrid(1, 128));
  EffectiveOperator F_bar(cell, std::make_shared<EffectiveCache>());
  BoxGrid eff(1, {0, 0}, {1, 0}, {128, 0});
  GridField u = solve_effective_nl(F_bar, GridField(eff));
  auto h = build_hierarchy(F_bar, u);
  // F(X^0) = F_bar at the high-order Hessian of u, which differs from the
  // discrete Hessian the effective solve zeroes by O(h^2).
  GridField d2h = second_difference(u, 0, 0);
  double hessian_gap = 0.0;
  for (std::size_t q = 1; q + 1 < eff.size(); ++q)
    hessian_gap = std::max(hessian_gap, std::abs(d2h[q] - h.u_derivatives.get({2, 0})[q]));
  CHECK(h.x0_residual <= F.Lambda() * hessian_gap + 1e-8);
  auto r = assemble_expansion_nl(F, h, constant_function(0.0), 1.0 / 8, 32);
  CHECK(r.barrier.passed);
  CHECK(r.barrier.violations == 0);
  CHECK(r.error_sup < r.barrier.bound + r.barrier.slack);
  CHECK(r.C0 > 0.0);
  CHECK(r.taylor.scaled == doctest::Approx(r.taylor.sup / (1.0 / 8)));

  // m = 2: eta = u + eps^2 w_2(x/eps, x).
  GridField eta = assemble_eta_nl(h, 1.0 / 8, eff);
  for (std::size_t q : {std::size_t(0), std::size_t(40), std::size_t(128)}) {
    Point x = eff.node(q);
    double expect = u[q] + (1.0 / 64) * h.w[2].evaluate(fast_variable(x, 1.0 / 8), x);
    CHECK(eta[q] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("barrier check flags a bracket violation") {
  BoxGrid g(1, {0, 0}, {1, 0}, {16, 0});
  GridField zero(g), bump(g);
  for (std::size_t p = 1; p + 1 < g.size(); ++p) bump[p] = 1.0;
  auto ok = verify_barrier(zero, zero, zero, 0.1, 2, 1.0, 1.0, 1.0, 0.0);
  CHECK(ok.passed);
  auto bad = verify_barrier(bump, zero, zero, 0.1, 2, 1.0, 1.0, 1.0, 0.0);
  CHECK_FALSE(bad.passed);
  CHECK(bad.violations > 0);
  CHECK(bad.worst_violation > 0.0);
}
