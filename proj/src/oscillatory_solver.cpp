#include "homog/oscillatory_solver.hpp"

#include <cmath>
#include <string>

#include "homog/effective_solver.hpp"

namespace homog {

BoxGrid eps_grid(const BoxGrid& domain, double eps, int points_per_period) {
  if (!(eps > 0.0)) throw ConfigError("epsilon must be positive");
  if (points_per_period < 1) throw ConfigError("points per period must be positive");
  return BoxGrid::with_max_spacing(domain.dim, domain.lower, domain.upper, eps / points_per_period);
}

void check_resolution(const BoxGrid& grid, double eps, int min_points_per_period) {
  double h = grid.max_spacing();
  if (h > eps / min_points_per_period * (1.0 + 1e-12))
    throw ResolutionError("grid spacing " + std::to_string(h) + " exceeds eps/" +
                          std::to_string(min_points_per_period) + " = " +
                          std::to_string(eps / min_points_per_period));
}

GridField solve_eps_linear(const CoefficientField& A, double eps, const GridField& rhs, const GridField& boundary,
                           int min_points_per_period) {
  const auto& grid = rhs.box();
  check_resolution(grid, eps, min_points_per_period);
  return solve_dirichlet(
      grid, [&](std::size_t p) { return A(fast_variable(grid.node(p), eps)); }, rhs, boundary);
}

GridField boundary_corrector_linear(const CoefficientField& A, double eps, const GridField& trace,
                                    int min_points_per_period) {
  GridField zero(trace.box());
  return solve_eps_linear(A, eps, zero, trace, min_points_per_period);
}

GridField solve_eps_nonlinear(const NonlinearOperator& F, double eps, const GridField& boundary,
                              const NewtonOptions& options, NewtonReport* report, int min_points_per_period) {
  const auto& grid = boundary.box();
  check_resolution(grid, eps, min_points_per_period);
  std::vector<Point> x(grid.size()), y(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    x[p] = grid.node(p);
    y[p] = fast_variable(x[p], eps);
  }
  BoxModel model{[&](std::size_t p, const SymMatrix& H) { return F.evaluate(H, x[p], y[p]); },
                 [&](std::size_t p) { return F.mixed_sign(y[p]); }};
  GridField u(grid);
  for (std::size_t p = 0; p < grid.size(); ++p)
    if (grid.on_boundary(p)) u[p] = boundary[p];
  NewtonOptions opts = options;
  if (!F.smooth()) opts.full_steps = true;
  return solve_box_newton(model, u, opts, report);
}

GridField boundary_corrector_nonlinear(const NonlinearOperator& F, double eps, const GridField& eta,
                                       const GridField& boundary, const NewtonOptions& options,
                                       NewtonReport* report, int min_points_per_period) {
  const auto& grid = eta.box();
  check_resolution(grid, eps, min_points_per_period);
  const std::size_t n = grid.size();
  std::vector<Point> x(n), y(n);
  std::vector<SymMatrix> hess(n, SymMatrix::Zero());
  std::vector<double> target(n, 0.0);
  std::vector<int> sign(n, 1);
  for (std::size_t p = 0; p < n; ++p) {
    x[p] = grid.node(p);
    y[p] = fast_variable(x[p], eps);
    sign[p] = F.mixed_sign(y[p]);
    if (grid.on_boundary(p)) continue;
    hess[p] = field_hessian(eta, p, sign[p]);
    target[p] = F.value(hess[p], x[p], y[p]);
  }
  BoxModel model{[&](std::size_t p, const SymMatrix& H) {
                   auto [v, g] = F.evaluate(hess[p] + H, x[p], y[p]);
                   return std::pair<double, SymMatrix>{v - target[p], g};
                 },
                 [&](std::size_t p) { return sign[p]; }};
  GridField theta(grid);
  for (std::size_t p = 0; p < n; ++p)
    if (grid.on_boundary(p)) theta[p] = boundary[p] - eta[p];
  NewtonOptions opts = options;
  if (!F.smooth()) opts.full_steps = true;
  return solve_box_newton(model, theta, opts, report);
}

GridField discrete_operator(const NonlinearOperator& F, double eps, const GridField& v) {
  const auto& grid = v.box();
  GridField out(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    if (grid.on_boundary(p)) continue;
    Point x = grid.node(p), y = fast_variable(x, eps);
    out[p] = F.value(field_hessian(v, p, F.mixed_sign(y)), x, y);
  }
  return out;
}

}  // namespace homog
