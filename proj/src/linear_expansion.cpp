#include "homog/linear_expansion.hpp"

#include <cmath>

#include "homog/interpolation.hpp"

namespace homog {

LinearCorrectors::LinearCorrectors(std::shared_ptr<const EffectiveTensors> tensors,
                                   std::shared_ptr<const PsiChain> chain)
    : tensors_(std::move(tensors)), chain_(std::move(chain)) {
  if (tensors_->max_order() < chain_->order)
    throw ConfigError("effective tensors do not reach the corrector order");
  const int dim = tensors_->dim();
  for (int l = 2; l <= chain_->order; ++l)
    for (const auto& t : index_tuples(dim, l)) {
      std::vector<GridField> fields{tensors_->chi(t)};
      for (int j = 0; j < dim; ++j) fields.push_back(tensors_->chi_gradient(t, j));
      chi_terms_.emplace_back(t, std::move(fields));
    }
}

double LinearCorrectors::evaluate(int k, const Point& y, const Point& x, DerivativeKey x_order, int y_axis) const {
  if (k < 1 || k > order()) throw Error("corrector index out of range");
  double v = 0.0;
  for (const auto& [t, fields] : chi_terms_) {
    const int l = int(t.size());
    if (l > k) continue;
    DerivativeKey key = x_order;
    for (int i : t) ++key[i];
    const auto& d = chain_->derivatives[k - l];
    v += interpolate_periodic(fields[y_axis + 1], y) * interpolate_box(d.get(key), x);
  }
  if (y_axis < 0) v += interpolate_box(chain_->derivatives[k].get(x_order), x);
  return v;
}

GridField LinearCorrectors::sample(int k, double eps, const BoxGrid& grid) const {
  GridField out(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    Point x = grid.node(p);
    out[p] = evaluate(k, fast_variable(x, eps), x);
  }
  return out;
}

double LinearCorrectors::cascade_residual(const CoefficientField& A, int k, int outer_stride) const {
  if (k < 3 || k > order()) throw Error("cascade identity needs 3 <= k <= m");
  const auto& cell = tensors_->grid();
  const auto& outer = chain_->psi[0].box();
  const int dim = cell.dim;
  CellOperator op(A, cell);
  const auto& a = op.coefficients();
  // a D_yy chi^t through the discrete cell operator, per tuple.
  std::vector<GridField> lchi;
  for (const auto& [t, fields] : chi_terms_) lchi.push_back(op.apply(fields[0]));
  double worst = 0.0;
  for (std::size_t q = 0; q < outer.size(); ++q) {
    auto c = outer.coords(q);
    if (c[0] % outer_stride != 0 || c[1] % outer_stride != 0) continue;
    for (std::size_t p = 0; p < cell.size(); ++p) {
      double r = 0.0;
      for (std::size_t n = 0; n < chi_terms_.size(); ++n) {
        const auto& [t, fields] = chi_terms_[n];
        const int l = int(t.size());
        DerivativeKey key{0, 0};
        for (int i : t) ++key[i];
        if (l <= k) r += lchi[n][p] * chain_->derivatives[k - l].get(key)[q];
        if (l <= k - 1)
          for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
              DerivativeKey kx = key;
              ++kx[i];
              r += 2.0 * a[p](i, j) * fields[j + 1][p] * chain_->derivatives[k - 1 - l].get(kx)[q];
            }
        if (l <= k - 2)
          for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
              DerivativeKey kx = key;
              ++kx[i];
              ++kx[j];
              r += a[p](i, j) * fields[0][p] * chain_->derivatives[k - 2 - l].get(kx)[q];
            }
      }
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
          DerivativeKey kx{0, 0};
          ++kx[i];
          ++kx[j];
          r += a[p](i, j) * chain_->derivatives[k - 2].get(kx)[q];
        }
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

BoundaryCorrection boundary_correctors(const LinearCorrectors& w, const CoefficientField& A, double eps,
                                       const BoxGrid& grid, int min_points_per_period) {
  BoundaryCorrection bc;
  bc.theta = GridField(grid);
  for (int k = 1; k <= w.order(); ++k) {
    GridField trace(grid);
    for (std::size_t p = 0; p < grid.size(); ++p) {
      if (!grid.on_boundary(p)) continue;
      Point x = grid.node(p);
      trace[p] = -w.evaluate(k, fast_variable(x, eps), x);
    }
    GridField z = boundary_corrector_linear(A, eps, trace, min_points_per_period);
    bc.theta += std::pow(eps, k) * z;
    bc.z.push_back(std::move(z));
  }
  return bc;
}

GridField residual_phi(const LinearCorrectors& w, const CoefficientField& A, double eps, const BoxGrid& grid) {
  const int m = w.order();
  const int dim = grid.dim;
  GridField phi(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    Point x = grid.node(p), y = fast_variable(x, eps);
    SymMatrix a = A(y);
    double v = 0.0;
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        DerivativeKey xx{0, 0};
        ++xx[i];
        ++xx[j];
        DerivativeKey xi{0, 0};
        ++xi[i];
        v += a(i, j) * (w.evaluate(m - 1, y, x, xx) + eps * w.evaluate(m, y, x, xx));
        v += 2.0 * a(i, j) * w.evaluate(m, y, x, xi, j);
      }
    phi[p] = v;
  }
  return phi;
}

double fourth_order_second_difference(const GridField& v, std::size_t p, int i, int j) {
  const auto& g = v.box();
  auto c = g.coords(p);
  auto at = [&](int d0, int d1) { return v[g.index(c[0] + d0, c[1] + d1)]; };
  const double c0 = at(0, 0);
  if (i == j) {
    int e0 = i == 0 ? 1 : 0, e1 = i == 1 ? 1 : 0;
    double h = g.spacing(i);
    double d1 = ((at(e0, e1) - c0) + (at(-e0, -e1) - c0)) / (h * h);
    double d2 = ((at(2 * e0, 2 * e1) - c0) + (at(-2 * e0, -2 * e1) - c0)) / (4.0 * h * h);
    return (4.0 * d1 - d2) / 3.0;
  }
  double h0 = g.spacing(0), h1 = g.spacing(1);
  double d1 = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h0 * h1);
  double d2 = (at(2, 2) - at(2, -2) - at(-2, 2) + at(-2, -2)) / (16.0 * h0 * h1);
  return (4.0 * d1 - d2) / 3.0;
}

ExpansionResult assemble_expansion(const LinearCorrectors& w, const CoefficientField& A, const GridField& u,
                                   const ScalarFunction& f, const ScalarFunction& g, double eps,
                                   int points_per_period, int min_points_per_period) {
  const BoxGrid grid = eps_grid(u.box(), eps, points_per_period);
  check_resolution(grid, eps, min_points_per_period);
  const int m = w.order();
  const int dim = grid.dim;
  ExpansionResult r;
  r.eps = eps;
  r.m = m;
  GridField rhs = sample_box(grid, f), boundary = sample_box(grid, g);
  r.u_eps = solve_eps_linear(A, eps, rhs, boundary, min_points_per_period);
  r.u_eps_residual = dirichlet_residual(
      grid, [&](std::size_t p) { return A(fast_variable(grid.node(p), eps)); }, r.u_eps, rhs);
  r.eta = GridField(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    Point x = grid.node(p), y = fast_variable(x, eps);
    double v = interpolate_box(u, x);
    double ek = 1.0;
    for (int k = 1; k <= m; ++k) {
      ek *= eps;
      v += ek * w.evaluate(k, y, x);
    }
    r.eta[p] = v;
  }
  BoundaryCorrection bc = boundary_correctors(w, A, eps, grid, min_points_per_period);
  r.theta = bc.theta;
  r.z = std::move(bc.z);
  r.phi = residual_phi(w, A, eps, grid);
  r.phi_sup = sup_norm(r.phi);
  r.theta_sup = sup_norm(r.theta);
  GridField err = r.u_eps - r.eta - r.theta;
  r.error_sup = sup_norm(err);
  // a D^2 theta = 0 holds for the discrete operator that defines theta.
  const double scale = std::pow(eps, m - 1);
  auto coeff = [&](std::size_t p) { return A(fast_variable(grid.node(p), eps)); };
  SparseMatrix L = box_operator(grid, coeff);
  Eigen::Map<const Eigen::VectorXd> th(r.theta.values().data(), Eigen::Index(grid.size()));
  Eigen::VectorXd ltheta = L * th;
  double worst = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    if (grid.depth(p) < 2) continue;
    Point x = grid.node(p), y = fast_variable(x, eps);
    SymMatrix a = A(y);
    double lhs = 0.0;
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) lhs += a(i, j) * fourth_order_second_difference(r.eta, p, i, j);
    lhs += ltheta[Eigen::Index(p)];
    worst = std::max(worst, std::abs(lhs - f(x) - scale * r.phi[p]));
  }
  r.identity_residual = worst;
  return r;
}

}  // namespace homog
