#include "homog/effective_solver.hpp"

#include <algorithm>
#include <cmath>

#include "homog/coefficient.hpp"
#include "homog/stencil.hpp"

namespace homog {

GridField sample_box(const BoxGrid& grid, const ScalarFunction& f) {
  GridField out(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) out[p] = f(grid.node(p));
  return out;
}

GridField solve_dirichlet(const BoxGrid& grid, const std::function<SymMatrix(std::size_t)>& a,
                          const GridField& rhs, const GridField& boundary) {
  if (rhs.nodes() != grid.size() || boundary.nodes() != grid.size())
    throw Error("effective data does not match the grid");
  SparseMatrix L = box_operator(grid, a);
  Eigen::VectorXd b(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p)
    b[Eigen::Index(p)] = grid.on_boundary(p) ? boundary[p] : rhs[p];
  Eigen::VectorXd x = sparse_solve(L, b, "effective Dirichlet problem");
  GridField u(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) u[p] = grid.on_boundary(p) ? boundary[p] : x[Eigen::Index(p)];
  return u;
}

GridField solve_effective_dirichlet(const SymMatrix& a_bar, const GridField& rhs, const GridField& boundary) {
  const auto& grid = rhs.box();
  auto ev = eigenvalues(a_bar, grid.dim);
  if (!(ev[0] > 0.0)) throw AdmissibilityError("effective matrix is not positive definite");
  auto coeff = [&](std::size_t) { return a_bar; };
  GridField u = solve_dirichlet(grid, coeff, rhs, boundary);
  // Residual relative to |rhs| + |L| |u|, |L| ~ 4 |a_bar| / h^2.
  double h = grid.max_spacing();
  double scale = 1.0 + sup_norm(rhs) + 4.0 * a_bar.norm() / (h * h) * sup_norm(u);
  double r = dirichlet_residual(grid, coeff, u, rhs);
  if (r > 1e-10 * scale)
    throw SolverError("effective Dirichlet residual too large");
  return u;
}

double dirichlet_residual(const BoxGrid& grid, const std::function<SymMatrix(std::size_t)>& a,
                          const GridField& u, const GridField& rhs) {
  SparseMatrix L = box_operator(grid, a);
  Eigen::Map<const Eigen::VectorXd> v(u.values().data(), Eigen::Index(u.values().size()));
  Eigen::VectorXd lu = L * v;
  double r = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p)
    if (!grid.on_boundary(p)) r = std::max(r, std::abs(lu[Eigen::Index(p)] - rhs[p]));
  return r;
}

GridField contract_tensor(const EffectiveTensors& tensors, int order, const DerivativeSet& d) {
  GridField out(d.base().box());
  for (const auto& t : index_tuples(tensors.dim(), order)) {
    double c = tensors.a_bar(t);
    if (c == 0.0) continue;
    const GridField& dt = d.get_tuple(t);
    for (std::size_t p = 0; p < out.nodes(); ++p) out[p] += c * dt[p];
  }
  return out;
}

PsiChain solve_psi_chain(const EffectiveTensors& tensors, const GridField& u, int m,
                         const DerivativeOptions& options) {
  if (m < 2) throw ConfigError("expansion order must be at least 2");
  if (tensors.max_order() < m) throw ConfigError("effective tensors do not reach the expansion order");
  const auto& grid = u.box();
  const SymMatrix a_bar = tensors.a_bar_matrix();
  PsiChain chain;
  chain.order = m;
  chain.psi.push_back(u);
  chain.derivatives.push_back(high_order_derivatives(u, m + 2, options));
  chain.residuals.push_back(0.0);
  const GridField zero(grid);
  for (int k = 1; k <= m; ++k) {
    GridField psi(grid);
    double residual = 0.0;
    // psi_k is built from numerical derivatives, so its own noise level is
    // that of its source, far above machine round-off.
    DerivativeOptions psi_options = options;
    if (k <= m - 2) {
      GridField rhs(grid);
      for (int l = 3; l <= k + 2; ++l) {
        const DerivativeSet& d = chain.derivatives[k - l + 2];
        rhs += (-1.0) * contract_tensor(tensors, l, d);
        for (const auto& t : index_tuples(grid.dim, l)) {
          if (tensors.a_bar(t) == 0.0) continue;
          DerivativeKey key{0, 0};
          for (int axis : t) ++key[axis];
          double scale = sup_norm(d.get(key));
          if (scale > 0.0) psi_options.roundoff = std::max(psi_options.roundoff, d.noise(key) / scale);
        }
      }
      psi = solve_effective_dirichlet(a_bar, rhs, zero);
      residual = dirichlet_residual(grid, [&](std::size_t) { return a_bar; }, psi, rhs);
    }
    chain.psi.push_back(psi);
    chain.derivatives.push_back(high_order_derivatives(psi, m - k + 2, psi_options));
    chain.residuals.push_back(residual);
  }
  return chain;
}

}  // namespace homog
