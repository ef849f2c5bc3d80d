#include <doctest.h>

#include <cmath>
#include <memory>

#include "homog/catalog.hpp"
#include "homog/effective_solver.hpp"
#include "homog/linear_expansion.hpp"

using namespace homog;

namespace {

struct Setup {
  CoefficientField A = CoefficientField::scalar(parse_function("shifted_sine(1, 2)"));
  ScalarFunction f = parse_function("exponential(1, 1)");
  ScalarFunction g = constant_function(0.0);
  BoxGrid eff{1, {0, 0}, {0.9, 0}, {256, 0}};
  std::shared_ptr<EffectiveTensors> tensors;
  GridField u;

  explicit Setup(int max_order) {
    tensors = std::make_shared<EffectiveTensors>(chi_recursion(A, TorusGrid(1, 256), max_order));
    u = solve_effective_dirichlet(tensors->a_bar_matrix(), sample_box(eff, f), sample_box(eff, g));
  }
  LinearCorrectors correctors(int m) const {
    return LinearCorrectors(tensors, std::make_shared<PsiChain>(solve_psi_chain(*tensors, u, m)));
  }
};

}  // namespace

TEST_CASE("fourth-order second difference is exact on quartics") {
  BoxGrid g(2, {0, 0}, {1, 1}, {10, 10});
  GridField v(g);
  for (std::size_t p = 0; p < g.size(); ++p) {
    auto x = g.node(p);
    v[p] = std::pow(x[0], 4) + x[0] * x[0] * x[1] * x[1] + std::pow(x[1], 3);
  }
  auto p = g.index(5, 4);
  auto x = g.node(p);
  CHECK(fourth_order_second_difference(v, p, 0, 0) == doctest::Approx(12 * x[0] * x[0] + 2 * x[1] * x[1]));
  CHECK(fourth_order_second_difference(v, p, 1, 1) == doctest::Approx(2 * x[0] * x[0] + 6 * x[1]));
  CHECK(fourth_order_second_difference(v, p, 0, 1) == doctest::Approx(4 * x[0] * x[1]));
}

TEST_CASE("w_2 is chi times the Hessian of u") {
  Setup s(2);
  auto w = s.correctors(2);
  const auto& d = w.chain().derivatives[0];
  const auto& chi = s.tensors->at({0, 0}).chi;
  for (std::size_t q : {std::size_t(10), std::size_t(128), std::size_t(200)}) {
    Point x = s.eff.node(q);
    for (std::size_t p : {std::size_t(3), std::size_t(77)}) {
      Point y = chi.torus().node(p);
      CHECK(w.evaluate(2, y, x) == doctest::Approx(chi[p] * d.get({2, 0})[q]).epsilon(1e-9));
    }
  }
}

TEST_CASE("w_3 closes the cascade identity") {
  Setup s(3);
  CHECK(s.correctors(3).cascade_residual(s.A, 3, 8) < 1e-6);
}

TEST_CASE("expansion at one eps: vanishing first boundary corrector, small error") {
  Setup s(3);
  for (int m : {2, 3}) {
    auto w = s.correctors(m);
    auto r = assemble_expansion(w, s.A, s.u, s.f, s.g, 1.0 / 16, 32);
    REQUIRE(r.z.size() == std::size_t(m));
    CHECK(sup_norm(r.z[0]) <= 1e-9);
    CHECK(r.error_sup < 1e-4);
    CHECK(r.theta_sup > 0.0);
    CHECK(std::isfinite(r.phi_sup));
    CHECK(r.u_eps_residual < 1e-8);
  }
}

TEST_CASE("residual phi stays bounded as eps shrinks") {
  Setup s(2);
  auto w = s.correctors(2);
  double lo = 1e300, hi = 0.0;
  for (double eps : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
    auto phi = residual_phi(w, s.A, eps, eps_grid(s.eff, eps, 32));
    lo = std::min(lo, sup_norm(phi));
    hi = std::max(hi, sup_norm(phi));
  }
  CHECK(hi < 2.0 * lo);
}
