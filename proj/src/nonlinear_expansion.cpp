#include "homog/nonlinear_expansion.hpp"

#include <cfloat>
#include <cmath>

#include "homog/effective_solver.hpp"
#include "homog/linear_expansion.hpp"

namespace homog {

namespace {

SymMatrix from_directions(const std::vector<double>& v, int dim) {
  SymMatrix m = SymMatrix::Zero();
  m(0, 0) = v[0];
  if (dim == 2) {
    m(1, 1) = v[1];
    m(0, 1) = m(1, 0) = v[2];
  }
  return m;
}

SymMatrix hessian_from(const DerivativeSet& d, std::size_t p, int dim) {
  SymMatrix m = SymMatrix::Zero();
  m(0, 0) = d.get({2, 0})[p];
  if (dim == 2) {
    m(1, 1) = d.get({0, 2})[p];
    m(0, 1) = m(1, 0) = d.get({1, 1})[p];
  }
  return m;
}

std::vector<DerivativeKey> keys_up_to(int dim, int order) {
  std::vector<DerivativeKey> out;
  for (int a = 0; a <= order; ++a)
    for (int b = 0; b <= (dim == 2 ? order - a : 0); ++b)
      if (a + b > 0) out.push_back({a, b});
  return out;
}

/// x-derivatives of a product field, column by column, with the noise test.
std::map<DerivativeKey, ProductField> x_derivatives(const ProductField& f, int order,
                                                    const DerivativeOptions& options) {
  std::map<DerivativeKey, ProductField> out;
  const auto keys = keys_up_to(f.outer().dim, order);
  for (auto k : keys) out.emplace(k, ProductField(f.cell(), f.outer()));
  for (std::size_t c = 0; c < f.cell().size(); ++c) {
    DerivativeSet d = high_order_derivatives(f.column(c), order, options);
    for (auto k : keys) out.at(k).set_column(c, d.get(k));
  }
  return out;
}

ProductField y_derivative(const ProductField& f, int axis) {
  ProductField out(f.cell(), f.outer());
  for (std::size_t q = 0; q < f.outer().size(); ++q) out.set_slice(q, first_difference(f.slice(q), axis));
  return out;
}

/// Discrete cell Hessian of every slice, one product field per direction.
DirectionalField y_hessian(const ProductField& f, const std::vector<int>& sign) {
  const int dim = f.cell().dim;
  const auto dirs = symmetric_directions(dim);
  DirectionalField out(dirs.size(), ProductField(f.cell(), f.outer()));
  for (std::size_t q = 0; q < f.outer().size(); ++q) {
    GridField s = f.slice(q);
    for (std::size_t p = 0; p < f.cell().size(); ++p) {
      SymMatrix H = field_hessian(s, p, sign[p]);
      for (std::size_t d = 0; d < dirs.size(); ++d) out[d].at(p, q) = H(dirs[d][0], dirs[d][1]);
    }
  }
  return out;
}

ProductField constant_in_y(const TorusGrid& cell, const GridField& g) {
  ProductField out(cell, g.box());
  for (std::size_t p = 0; p < cell.size(); ++p) out.set_column(p, g);
  return out;
}

SymMatrix evaluate_directional(const DirectionalField& f, const Point& y, const Point& x, int dim) {
  std::vector<double> v(f.size());
  for (std::size_t d = 0; d < f.size(); ++d) v[d] = f[d].evaluate(y, x);
  return from_directions(v, dim);
}

}  // namespace

EffectiveCache::Entry EffectiveOperator::evaluate(const SymMatrix& M, const Point& x, GridField* warm) const {
  if (cache_)
    if (auto hit = cache_->find(M, x)) return *hit;
  EffectiveOperatorSample s = cell_->sample(M, x, warm);
  if (warm) *warm = s.w;
  EffectiveCache::Entry e{s.F_bar, s.dF_dp, s.dF_dx};
  if (cache_) cache_->insert(M, x, e);
  return e;
}

GridField solve_effective_nl(const EffectiveOperator& F_bar, const GridField& boundary, const NewtonOptions& options,
                             NewtonReport* report) {
  const auto& grid = boundary.box();
  const TorusGrid& cell = F_bar.cell().grid();
  if (grid.dim != cell.dim) throw ConfigError("effective grid and cell grid dimensions differ");
  const std::size_t n = grid.size();
  std::vector<Point> x(n);
  std::vector<GridField> warm(n, GridField(cell));
  std::vector<int> sign(n, 1);
  for (std::size_t p = 0; p < n; ++p) {
    x[p] = grid.node(p);
    if (grid.dim == 2 && !grid.on_boundary(p)) {
      double d01 = F_bar.evaluate(SymMatrix::Zero(), x[p], &warm[p]).dF_dp(0, 1);
      sign[p] = d01 >= 0.0 ? 1 : -1;
    }
  }
  BoxModel model{[&](std::size_t p, const SymMatrix& H) {
                   auto e = F_bar.evaluate(H, x[p], &warm[p]);
                   return std::pair<double, SymMatrix>{e.F_bar, e.dF_dp};
                 },
                 [&](std::size_t p) { return sign[p]; }};
  GridField u(grid);
  for (std::size_t p = 0; p < n; ++p)
    if (grid.on_boundary(p)) u[p] = boundary[p];
  NewtonOptions opts = options;
  if (!F_bar.cell().op().smooth()) opts.full_steps = true;
  return solve_box_newton(model, u, opts, report);
}

void build_w2(const EffectiveOperator& F_bar, NonlinearHierarchy& h) {
  const NonlinearCell& cell = F_bar.cell();
  const int dim = h.outer.dim;
  const auto dirs = symmetric_directions(dim);
  const std::size_t n = h.outer.size();
  h.w.assign(std::size_t(h.depth) + 1, ProductField(h.cell, h.outer));
  h.coefficients.assign(dirs.size(), ProductField(h.cell, h.outer));
  h.chi.assign(dirs.size(), ProductField(h.cell, h.outer));
  h.a_bar.assign(dirs.size(), GridField(h.outer));
  h.w2_cell_residual = 0.0;
  h.effective_residual = 0.0;
  GridField warm(h.cell);
  for (std::size_t q = 0; q < n; ++q) {
    Point x = h.outer.node(q);
    SymMatrix M = hessian_from(h.u_derivatives, q, dim);
    // Warm start along the grid-ordered path.
    EffectiveOperatorSample s = cell.sample(M, x, &warm);
    warm = s.w;
    h.w[2].set_slice(q, s.w);
    h.w2_cell_residual = std::max(h.w2_cell_residual, s.residual);
    if (!h.outer.on_boundary(q)) h.effective_residual = std::max(h.effective_residual, std::abs(s.F_bar));
    auto a = cell.linearized_coeffs(s);
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      auto [k, l] = dirs[d];
      h.chi[d].set_slice(q, s.chi[d]);
      h.a_bar[d][q] = s.dF_dp(k, l);
      for (std::size_t p = 0; p < h.cell.size(); ++p) h.coefficients[d].at(p, q) = a[p](k, l);
    }
  }
}

void build_w3(const EffectiveOperator& F_bar, NonlinearHierarchy& h, const DerivativeOptions& options) {
  if (h.w.size() < 4) throw Error("hierarchy depth does not include w_3");
  const int dim = h.outer.dim;
  const auto dirs = symmetric_directions(dim);
  const std::size_t n = h.outer.size(), nc = h.cell.size();
  // Two orders of x-regularity of w_2 are consumed here: D_x w_2 and D_x D_y w_2.
  auto dx = x_derivatives(h.w[2], 1, options);
  std::vector<std::vector<ProductField>> dxy(dim);
  for (int i = 0; i < dim; ++i) {
    DerivativeKey k{0, 0};
    k[i] = 1;
    for (int j = 0; j < dim; ++j) dxy[i].push_back(y_derivative(dx.at(k), j));
  }
  h.Psi1 = GridField(h.outer);
  h.phi3 = ProductField(h.cell, h.outer);
  h.w3_cell_residual = 0.0;
  (void)F_bar;
  for (std::size_t q = 0; q < n; ++q) {
    std::vector<SymMatrix> a(nc);
    for (std::size_t p = 0; p < nc; ++p) {
      std::vector<double> v(dirs.size());
      for (std::size_t d = 0; d < dirs.size(); ++d) v[d] = h.coefficients[d].at(p, q);
      a[p] = from_directions(v, dim);
    }
    GridField rhs(h.cell);
    for (std::size_t p = 0; p < nc; ++p) {
      double r = 0.0;
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) r += 2.0 * a[p](i, j) * dxy[i][j].at(p, q);
      rhs[p] = r;
    }
    CellSolution s = CellOperator(a, h.cell).solve_direct(rhs);
    h.Psi1[q] = s.gamma;
    h.phi3.set_slice(q, s.w);
    h.w3_cell_residual = std::max(h.w3_cell_residual, s.residual);
  }
  auto a_bar_at = [&](std::size_t p) {
    std::vector<double> v(dirs.size());
    for (std::size_t d = 0; d < dirs.size(); ++d) v[d] = h.a_bar[d][p];
    return from_directions(v, dim);
  };
  GridField rhs = -1.0 * h.Psi1;
  h.psi1 = solve_dirichlet(h.outer, a_bar_at, rhs, GridField(h.outer));
  h.psi1_residual = dirichlet_residual(h.outer, a_bar_at, h.psi1, rhs);
  DerivativeSet dpsi = high_order_derivatives(h.psi1, 2, options);
  h.w[1] = constant_in_y(h.cell, h.psi1);
  ProductField w3 = h.phi3;
  for (std::size_t q = 0; q < n; ++q) {
    SymMatrix D2 = hessian_from(dpsi, q, dim);
    for (std::size_t p = 0; p < nc; ++p) {
      double v = 0.0;
      for (std::size_t d = 0; d < dirs.size(); ++d) {
        auto [k, l] = dirs[d];
        v += (k == l ? 1.0 : 2.0) * h.chi[d].at(p, q) * D2(k, l);
      }
      w3.at(p, q) += v;
    }
  }
  h.w[3] = std::move(w3);
}

void build_taylor_fields(const NonlinearOperator& F, NonlinearHierarchy& h, const DerivativeOptions& options) {
  const int dim = h.outer.dim;
  const auto dirs = symmetric_directions(dim);
  const std::size_t n = h.outer.size(), nc = h.cell.size();
  std::vector<int> sign(nc);
  for (std::size_t p = 0; p < nc; ++p) sign[p] = F.mixed_sign(h.cell.node(p));
  const int r = h.depth;
  // Per corrector order: D_xx, symmetrised D_xy, D_yy (each per direction).
  std::vector<DirectionalField> dxx(r + 1), dxy(r + 1), dyy(r + 1);
  auto zero = [&]() { return DirectionalField(dirs.size(), ProductField(h.cell, h.outer)); };
  for (int k = 0; k <= r; ++k) dxx[k] = dxy[k] = dyy[k] = zero();
  for (std::size_t q = 0; q < n; ++q) {
    SymMatrix D2 = hessian_from(h.u_derivatives, q, dim);
    for (std::size_t d = 0; d < dirs.size(); ++d)
      for (std::size_t p = 0; p < nc; ++p) dxx[0][d].at(p, q) = D2(dirs[d][0], dirs[d][1]);
  }
  if (r >= 3) {
    DerivativeSet dpsi = high_order_derivatives(h.psi1, 2, options);
    for (std::size_t q = 0; q < n; ++q) {
      SymMatrix D2 = hessian_from(dpsi, q, dim);
      for (std::size_t d = 0; d < dirs.size(); ++d)
        for (std::size_t p = 0; p < nc; ++p) dxx[1][d].at(p, q) = D2(dirs[d][0], dirs[d][1]);
    }
  }
  for (int k = 2; k <= r; ++k) {
    auto dx = x_derivatives(h.w[k], 2, options);
    std::vector<ProductField> first(dim);
    for (int i = 0; i < dim; ++i) {
      DerivativeKey key{0, 0};
      key[i] = 1;
      first[i] = dx.at(key);
    }
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      auto [i, j] = dirs[d];
      DerivativeKey key{0, 0};
      ++key[i];
      ++key[j];
      dxx[k][d] = dx.at(key);
      ProductField a = y_derivative(first[i], j), b = y_derivative(first[j], i);
      for (std::size_t t = 0; t < a.values().size(); ++t) dxy[k][d].values()[t] = a.values()[t] + b.values()[t];
    }
    dyy[k] = y_hessian(h.w[k], sign);
  }
  h.X.assign(std::size_t(r) + 1, zero());
  for (int k = 0; k <= r; ++k)
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      auto& out = h.X[k][d].values();
      for (std::size_t t = 0; t < out.size(); ++t) {
        double v = dxx[k][d].values()[t];
        if (k + 1 <= r) v += dxy[k + 1][d].values()[t];
        if (k + 2 <= r) v += dyy[k + 2][d].values()[t];
        out[t] = v;
      }
    }
  h.x0_residual = 0.0;
  for (std::size_t q = 0; q < n; ++q) {
    Point x = h.outer.node(q);
    for (std::size_t p = 0; p < nc; ++p) {
      std::vector<double> v(dirs.size());
      for (std::size_t d = 0; d < dirs.size(); ++d) v[d] = h.X[0][d].at(p, q);
      h.x0_residual = std::max(h.x0_residual, std::abs(F.value(from_directions(v, dim), x, h.cell.node(p))));
    }
  }
}

NonlinearHierarchy build_hierarchy(const EffectiveOperator& F_bar, const GridField& u,
                                   const NonlinearHierarchyOptions& options) {
  if (options.m < 2 || options.m > 5)
    throw ConfigError("nonlinear hierarchy supports 2 <= m <= 5 (correctors beyond w_3 are not built)");
  NonlinearHierarchy h;
  h.m = options.m;
  h.depth = options.m / 2 + 1;
  h.cell = F_bar.cell().grid();
  h.outer = u.box();
  h.u = u;
  h.u_derivatives = high_order_derivatives(u, 2, options.derivatives);
  build_w2(F_bar, h);
  if (h.depth >= 3) build_w3(F_bar, h, options.derivatives);
  build_taylor_fields(F_bar.cell().op(), h, options.derivatives);
  return h;
}

GridField assemble_eta_nl(const NonlinearHierarchy& h, double eps, const BoxGrid& grid) {
  GridField eta(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    Point x = grid.node(p), y = fast_variable(x, eps);
    double v = interpolate_box(h.u, x);
    double ek = eps;
    for (int k = 1; k <= h.depth; ++k, ek *= eps) {
      if (k == 1) {
        if (h.depth >= 3) v += ek * interpolate_box(h.psi1, x);
        continue;
      }
      v += ek * h.w[k].evaluate(y, x);
    }
    eta[p] = v;
  }
  return eta;
}

TaylorResidual taylor_residual(const NonlinearOperator& F, const NonlinearHierarchy& h, double eps,
                               const GridField& eta) {
  const auto& grid = eta.box();
  const int dim = grid.dim;
  TaylorResidual t;
  t.R_tilde = GridField(grid);
  t.R_direct = GridField(grid);
  t.R_discrete = GridField(grid);
  t.Y_sup = GridField(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    if (grid.on_boundary(p)) continue;
    Point x = grid.node(p), y = fast_variable(x, eps);
    SymMatrix X0 = evaluate_directional(h.X[0], y, x, dim);
    SymMatrix Y = SymMatrix::Zero();
    double ek = 1.0;
    for (int k = 1; k <= h.depth; ++k, ek *= eps) Y += ek * evaluate_directional(h.X[k], y, x, dim);
    t.Y_sup[p] = dim == 1 ? std::abs(Y(0, 0)) : Y.norm();
    t.Y_bound = std::max(t.Y_bound, t.Y_sup[p]);
    t.R_tilde[p] = F.value(X0 + eps * Y, x, y);
    t.sup = std::max(t.sup, std::abs(t.R_tilde[p]));
    t.R_discrete[p] = F.value(field_hessian(eta, p, F.mixed_sign(y)), x, y);
    t.discrete_gap = std::max(t.discrete_gap, std::abs(t.R_tilde[p] - t.R_discrete[p]));
    if (grid.depth(p) >= 2) {
      SymMatrix D = SymMatrix::Zero();
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) D(i, j) = fourth_order_second_difference(eta, p, i, j);
      t.R_direct[p] = F.value(D, x, y);
      t.consistency = std::max(t.consistency, std::abs(t.R_tilde[p] - t.R_direct[p]));
    }
  }
  t.scaled = t.sup / std::pow(eps, h.depth - 1);
  return t;
}

BarrierReport verify_barrier(const GridField& u_eps, const GridField& eta, const GridField& theta, double eps,
                             int depth, double lambda, double C0, double radius, double slack) {
  const auto& grid = u_eps.box();
  const Point c = grid.center();
  const double coeff = C0 * std::pow(eps, depth - 1) / (2.0 * lambda);
  BarrierReport b;
  b.bound = coeff * radius * radius;
  b.slack = slack;
  b.worst_violation = -INFINITY;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    Point x = grid.node(p);
    double r2 = 0.0;
    for (int a = 0; a < grid.dim; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
    double width = coeff * (radius * radius - r2) + slack;
    double mid = eta[p] + theta[p];
    double violation = std::max(u_eps[p] - (mid + width), (mid - width) - u_eps[p]);
    b.worst_violation = std::max(b.worst_violation, violation);
    if (violation > 0.0) ++b.violations;
    b.error_sup = std::max(b.error_sup, std::abs(u_eps[p] - mid));
  }
  b.passed = b.violations == 0;
  return b;
}

NonlinearExpansionResult assemble_expansion_nl(const NonlinearOperator& F, const NonlinearHierarchy& h,
                                               const ScalarFunction& g, double eps, int points_per_period,
                                               int min_points_per_period, const NewtonOptions& newton) {
  const BoxGrid grid = eps_grid(h.outer, eps, points_per_period);
  check_resolution(grid, eps, min_points_per_period);
  NonlinearExpansionResult r;
  r.eps = eps;
  r.m = h.m;
  GridField boundary = sample_box(grid, g);
  NewtonReport ru, rt;
  r.u_eps = solve_eps_nonlinear(F, eps, boundary, newton, &ru, min_points_per_period);
  r.u_eps_iterations = ru.iterations;
  r.eta = assemble_eta_nl(h, eps, grid);
  r.theta = boundary_corrector_nonlinear(F, eps, r.eta, boundary, newton, &rt, min_points_per_period);
  r.theta_sup = sup_norm(r.theta);
  r.error_sup = sup_norm(r.u_eps - r.eta - r.theta);
  r.taylor = taylor_residual(F, h, eps, r.eta);
  r.C0 = r.taylor.scaled;
  const double R = grid.circumradius();
  // The discrete comparison sees F(D_h^2 eta); its gap to the smooth residual
  // and the Newton residuals widen the bracket.
  const double slack = R * R / (2.0 * F.lambda()) * (r.taylor.discrete_gap + ru.residual + rt.residual) +
                       64.0 * DBL_EPSILON * (1.0 + sup_norm(r.u_eps));
  r.barrier = verify_barrier(r.u_eps, r.eta, r.theta, eps, h.depth, F.lambda(), r.C0, R, slack);
  return r;
}

}  // namespace homog
