#include <doctest.h>

#include "homog/catalog.hpp"
#include "homog/effective_solver.hpp"
#include "homog/oscillatory_solver.hpp"

using namespace homog;

TEST_CASE("eps grid resolves the period") {
  BoxGrid domain(1, {0, 0}, {0.9, 0}, {2, 0});
  auto g = eps_grid(domain, 1.0 / 16, 32);
  CHECK(g.max_spacing() <= 1.0 / 512 + 1e-15);
  CHECK_NOTHROW(check_resolution(g, 1.0 / 16, 16));
  CHECK_THROWS_AS(check_resolution(g, 1.0 / 128, 16), ResolutionError);
  CHECK_THROWS_AS(eps_grid(domain, 0.0, 32), ConfigError);
}

TEST_CASE("constant coefficient eps problem equals the effective problem") {
  auto A = CoefficientField::scalar(constant_function(2.0));
  BoxGrid g = eps_grid(BoxGrid(1, {0, 0}, {1, 0}, {2, 0}), 1.0 / 8, 32);
  GridField rhs = sample_box(g, parse_function("exponential(1, 1)"));
  GridField bc(g);
  GridField u_eps = solve_eps_linear(A, 1.0 / 8, rhs, bc);
  GridField u = solve_effective_dirichlet(2.0 * SymMatrix::Identity(), rhs, bc);
  CHECK(sup_diff(u_eps, u) < 1e-12);
}

TEST_CASE("boundary corrector with constant data is constant") {
  auto A = CoefficientField::entries(parse_function("shifted_sine(1, 2, 0)"), constant_function(2.0));
  BoxGrid g = eps_grid(BoxGrid(2, {0, 0}, {1, 1}, {2, 2}), 1.0 / 2, 16);
  auto z = boundary_corrector_linear(A, 1.0 / 2, GridField(g, 1, 1.0));
  for (double v : z.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("nonlinear eps solver reproduces the linear one for a linear operator") {
  auto A = CoefficientField::scalar(parse_function("shifted_sine(1, 2)"));
  auto f = parse_function("exponential(1, 1)");
  auto F = NonlinearOperator::linear(A, f);
  const double eps = 1.0 / 8;
  BoxGrid g = eps_grid(BoxGrid(1, {0, 0}, {1, 0}, {2, 0}), eps, 32);
  GridField bc(g);
  GridField lin = solve_eps_linear(A, eps, sample_box(g, f), bc);
  NewtonReport rep;
  GridField nl = solve_eps_nonlinear(F, eps, bc, {}, &rep);
  CHECK(rep.converged);
  CHECK(sup_diff(lin, nl) < 1e-10);
  CHECK(sup_norm(discrete_operator(F, eps, nl)) < 1e-8);
}

TEST_CASE("too coarse a grid is refused") {
  auto A = CoefficientField::scalar(parse_function("shifted_sine(1, 2)"));
  BoxGrid g(1, {0, 0}, {1, 0}, {32, 0});
  CHECK_THROWS_AS(solve_eps_linear(A, 1.0 / 8, GridField(g), GridField(g)), ResolutionError);
}
