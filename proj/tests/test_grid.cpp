#include <doctest.h>

#include <cmath>
#include <numbers>

#include "homog/catalog.hpp"
#include "homog/coefficient.hpp"
#include "homog/derivatives.hpp"
#include "homog/effective_solver.hpp"
#include "homog/interpolation.hpp"
#include "homog/stencil.hpp"

using namespace homog;

TEST_CASE("torus indexing wraps in both axes") {
  TorusGrid g(2, 8);
  CHECK(g.size() == 64);
  auto p = g.index(7, 0);
  CHECK(g.neighbor(p, 1, 0) == g.index(0, 0));
  CHECK(g.neighbor(p, 0, -1) == g.index(7, 7));
  auto c = g.coords(g.index(3, 5));
  CHECK(c[0] == 3);
  CHECK(c[1] == 5);
  CHECK(g.node(g.index(4, 2))[0] == doctest::Approx(0.5));
}

TEST_CASE("box grid spacing, faces and depth") {
  auto g = BoxGrid::with_max_spacing(1, {0, 0}, {0.9, 0}, 0.01);
  CHECK(g.max_spacing() <= 0.01);
  CHECK(g.intervals[0] == 90);
  CHECK(g.on_boundary(0));
  CHECK(g.on_boundary(g.size() - 1));
  CHECK_FALSE(g.on_boundary(1));
  CHECK(g.depth(3) == 3);
  BoxGrid sq(2, {0, 0}, {1, 1}, {4, 4});
  CHECK(sq.size() == 25);
  CHECK(sq.on_boundary(sq.index(0, 2)));
  CHECK(sq.depth(sq.index(2, 2)) == 2);
}

TEST_CASE("monotone stencil is exact on quadratics with nonnegative neighbours") {
  SymMatrix a;
  a << 2.0, 0.4, 0.4, 1.5;
  const double h = 0.1;
  auto s = monotone_stencil(a, 2, h, h);
  CHECK(s.worst_off_center() >= 0.0);
  // q(x) = x0^2 + 3 x0 x1 - x1^2 has a_ij D_ij q = 2 a00 + 6 a01 - 2 a11.
  auto q = [&](int d0, int d1) {
    double x0 = 0.3 + d0 * h, x1 = -0.2 + d1 * h;
    return x0 * x0 + 3 * x0 * x1 - x1 * x1;
  };
  double v = 0.0;
  for (int d0 = -1; d0 <= 1; ++d0)
    for (int d1 = -1; d1 <= 1; ++d1) v += s.at(d0, d1) * q(d0, d1);
  CHECK(v == doctest::Approx(2 * 2.0 + 6 * 0.4 - 2 * 1.5).epsilon(1e-10));
}

TEST_CASE("wrong mixed leg breaks monotonicity and is reported") {
  SymMatrix a;
  a << 1.0, 0.9, 0.9, 1.0;
  auto s = signed_stencil(a, 2, 0.1, 0.1, -1);
  CHECK_THROWS_AS(audit_monotone(s, "test"), MonotonicityError);
}

TEST_CASE("periodic cubic interpolation") {
  TorusGrid g(1, 64);
  GridField f(g);
  for (std::size_t p = 0; p < g.size(); ++p) f[p] = std::sin(2 * std::numbers::pi * g.node(p)[0]);
  for (double y : {0.013, 0.5, 0.777, 1.25, -0.1})
    CHECK(interpolate_periodic(f, {y, 0}) == doctest::Approx(std::sin(2 * std::numbers::pi * y)).epsilon(1e-5));
}

TEST_CASE("finite-difference weights") {
  auto w = fd_weights(0.0, {-1.0, 0.0, 1.0}, 2);
  CHECK(w[0] == doctest::Approx(1.0));
  CHECK(w[1] == doctest::Approx(-2.0));
  CHECK(w[2] == doctest::Approx(1.0));
  CHECK_THROWS_AS(fd_weights(0.0, {0.0, 1.0}, 2), Error);
}

TEST_CASE("high-order derivatives of a polynomial") {
  BoxGrid g(1, {0, 0}, {1, 0}, {64, 0});
  GridField u = sample_box(g, parse_function("polynomial(0, 0, 0, 1)"));
  DerivativeOptions opt;
  opt.accuracy = 4;
  auto d = high_order_derivatives(u, 3, opt);
  for (std::size_t p = 0; p < g.size(); ++p) {
    double x = g.node(p)[0];
    CHECK(d.get({1, 0})[p] == doctest::Approx(3 * x * x).epsilon(1e-8).scale(1));
    CHECK(d.get({2, 0})[p] == doctest::Approx(6 * x).epsilon(1e-7).scale(1));
    CHECK(d.get({3, 0})[p] == doctest::Approx(6.0).epsilon(1e-6));
  }
  CHECK_THROWS_AS(mixed_derivative(u, {2, 0}, 1, 3), ConfigError);
  BoxGrid tiny(1, {0, 0}, {1, 0}, {4, 0});
  CHECK_THROWS_AS(high_order_derivatives(sample_box(tiny, parse_function("constant(1)")), 4), ResolutionError);
}

TEST_CASE("catalog parsing") {
  CHECK(parse_function("shifted_sine(1, 2)")({0.25, 0}) == doctest::Approx(3.0));
  CHECK(parse_function("shifted_cosine(0.5, 2.5)")({0.0, 0}) == doctest::Approx(3.0));
  CHECK(parse_function("exponential(2, 1)")({1.0, 0}) == doctest::Approx(2 * std::exp(1.0)));
  CHECK(parse_function("bowl(2)")({1.0, 2.0}) == doctest::Approx(10.0));
  CHECK(parse_function("shifted_sine(1, 2, 1)")({0.0, 0.25}) == doctest::Approx(3.0));
  CHECK(parse_function("1.5")({0.3, 0.0}) == doctest::Approx(1.5));
  CHECK(parse_number("1/16") == doctest::Approx(0.0625));
  CHECK_THROWS_AS(parse_function("2+sin(2*pi*y)"), ConfigError);
  CHECK_THROWS_AS(parse_function("wobble(1)"), ConfigError);
  CHECK_THROWS_AS(parse_number("1/0"), ConfigError);
}

TEST_CASE("coefficient admissibility") {
  auto a = CoefficientField::scalar(parse_function("shifted_sine(1, 2)"));
  CHECK(a.lambda() == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(a.Lambda() == doctest::Approx(3.0).epsilon(1e-3));
  CHECK_NOTHROW(a.require_bounds(0.5, 4.0));
  CHECK_THROWS_AS(a.require_bounds(1.5, 4.0), AdmissibilityError);
  CHECK_THROWS_AS(CoefficientField::scalar(parse_function("polynomial(1, 1)")), AdmissibilityError);
  CHECK_THROWS_AS(CoefficientField::scalar(parse_function("shifted_sine(3, 2)")), AdmissibilityError);
}
