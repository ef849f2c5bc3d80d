#include "homog/nonlinear_operator.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <random>

#include <Eigen/SparseLU>

namespace homog {

namespace {

double trace(const SymMatrix& m, int dim) { return dim == 1 ? m(0, 0) : m(0, 0) + m(1, 1); }

double frob(const SymMatrix& m, int dim) {
  return dim == 1 ? std::abs(m(0, 0)) : m.norm();
}

int sign_of(double v) { return v >= 0.0 ? 1 : -1; }

}  // namespace

NonlinearOperator NonlinearOperator::linear(CoefficientField a, ScalarFunction source) {
  NonlinearOperator op;
  op.dim_ = a.dim();
  op.form_ = OperatorForm::Linear;
  op.description_ = "linear(" + a.description() + "; " + source.text + ")";
  op.branches_.push_back({std::move(a), std::move(source)});
  op.finish();
  return op;
}

NonlinearOperator NonlinearOperator::min_of_linear(std::vector<LinearBranch> branches) {
  if (branches.empty()) throw ConfigError("min_of_linear needs at least one branch");
  NonlinearOperator op;
  op.dim_ = branches.front().a.dim();
  op.form_ = OperatorForm::MinOfLinear;
  op.description_ = "min_of_linear(";
  for (std::size_t k = 0; k < branches.size(); ++k) {
    if (branches[k].a.dim() != op.dim_) throw ConfigError("branches have different dimensions");
    op.description_ += (k ? "; " : "") + branches[k].a.description() + " - " + branches[k].source.text;
  }
  op.description_ += ")";
  op.branches_ = std::move(branches);
  op.finish();
  return op;
}

NonlinearOperator NonlinearOperator::sqrt_concave(CoefficientField a, ScalarFunction curvature,
                                                  ScalarFunction source) {
  NonlinearOperator op;
  op.dim_ = a.dim();
  op.form_ = OperatorForm::SqrtConcave;
  op.description_ = "sqrt_concave(" + a.description() + "; " + curvature.text + "; " + source.text + ")";
  op.a_ = std::move(a);
  op.curvature_ = std::move(curvature);
  op.source_ = std::move(source);
  op.finish();
  return op;
}

void NonlinearOperator::finish() {
  // Source Lipschitz bound on the unit box; coefficient bounds from samples.
  auto source_slope = [this](const ScalarFunction& f) {
    double s = 0.0;
    const int n = 64;
    const double h = 1.0 / n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < (dim_ == 2 ? n : 1); ++j) {
        Point x{i * h, j * h};
        for (int k = 0; k < dim_; ++k) {
          Point xn = x;
          xn[k] += h;
          s = std::max(s, std::abs(f(xn) - f(x)) / h);
        }
      }
    return s;
  };
  if (form_ == OperatorForm::SqrtConcave) {
    double cmax = 0.0, cmin = INFINITY, cslope = 0.0;
    TorusGrid g(dim_, dim_ == 1 ? 512 : 64);
    for (std::size_t p = 0; p < g.size(); ++p) {
      Point y = g.node(p);
      double c = curvature_(y);
      cmax = std::max(cmax, c);
      cmin = std::min(cmin, c);
      for (int k = 0; k < dim_; ++k) {
        Point yn = y;
        yn[k] += g.spacing();
        cslope = std::max(cslope, std::abs(curvature_(yn) - c) / g.spacing());
      }
    }
    if (cmin < 0.0) throw AdmissibilityError("sqrt_concave curvature must be nonnegative");
    lambda_ = a_.lambda() - cmax;
    Lambda_ = a_.Lambda() + cmax;
    sigma_ = a_.sigma() + cslope;
    tau0_ = source_slope(source_);
  } else {
    lambda_ = INFINITY;
    Lambda_ = 0.0;
    for (const auto& b : branches_) {
      lambda_ = std::min(lambda_, b.a.lambda());
      Lambda_ = std::max(Lambda_, b.a.Lambda());
      sigma_ = std::max(sigma_, b.a.sigma());
      tau0_ = std::max(tau0_, source_slope(b.source));
    }
  }
  if (!(lambda_ > 0.0)) throw AdmissibilityError(description_ + ": operator is not uniformly elliptic");
  std::string why;
  if (audit(20240601u, 64, &why) > 0) throw AdmissibilityError(description_ + ": " + why);
}

double NonlinearOperator::value(const SymMatrix& M, const Point& x, const Point& y) const {
  switch (form_) {
    case OperatorForm::Linear:
      return contract(branches_[0].a(y), M, dim_) - branches_[0].source(x);
    case OperatorForm::MinOfLinear: {
      double v = INFINITY;
      for (const auto& b : branches_) v = std::min(v, contract(b.a(y), M, dim_) - b.source(x));
      return v;
    }
    case OperatorForm::SqrtConcave: {
      double s = 0.0;
      for (int i = 0; i < dim_; ++i) s += std::sqrt(1.0 + M(i, i) * M(i, i));
      return contract(a_(y), M, dim_) - curvature_(y) * s - source_(x);
    }
  }
  return 0.0;
}

int NonlinearOperator::active_branch(const SymMatrix& M, const Point& x, const Point& y) const {
  if (form_ != OperatorForm::MinOfLinear) return 0;
  int best = 0;
  double v = INFINITY;
  for (std::size_t k = 0; k < branches_.size(); ++k) {
    double vk = contract(branches_[k].a(y), M, dim_) - branches_[k].source(x);
    if (vk < v) {
      v = vk;
      best = int(k);
    }
  }
  return best;
}

SymMatrix NonlinearOperator::gradient(const SymMatrix& M, const Point& x, const Point& y) const {
  switch (form_) {
    case OperatorForm::Linear:
      return branches_[0].a(y);
    case OperatorForm::MinOfLinear:
      return branches_[active_branch(M, x, y)].a(y);
    case OperatorForm::SqrtConcave: {
      SymMatrix g = a_(y);
      double c = curvature_(y);
      for (int i = 0; i < dim_; ++i) g(i, i) -= c * M(i, i) / std::sqrt(1.0 + M(i, i) * M(i, i));
      return g;
    }
  }
  return SymMatrix::Zero();
}

std::pair<double, SymMatrix> NonlinearOperator::evaluate(const SymMatrix& M, const Point& x,
                                                         const Point& y) const {
  if (form_ == OperatorForm::MinOfLinear) {
    int k = active_branch(M, x, y);
    SymMatrix a = branches_[k].a(y);
    return {contract(a, M, dim_) - branches_[k].source(x), a};
  }
  return {value(M, x, y), gradient(M, x, y)};
}

double NonlinearOperator::second_variation(const SymMatrix& M, const Point&, const Point& y,
                                           const SymMatrix& N) const {
  if (form_ != OperatorForm::SqrtConcave) return 0.0;
  double c = curvature_(y), s = 0.0;
  for (int i = 0; i < dim_; ++i) s += N(i, i) * N(i, i) / std::pow(1.0 + M(i, i) * M(i, i), 1.5);
  return -c * s;
}

std::array<double, 2> NonlinearOperator::x_gradient(const SymMatrix& M, const Point& x, const Point& y) const {
  std::array<double, 2> g{0.0, 0.0};
  const double h = 1e-5;
  for (int k = 0; k < dim_; ++k) {
    Point xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    g[k] = (value(M, xp, y) - value(M, xm, y)) / (2.0 * h);
  }
  return g;
}

int NonlinearOperator::mixed_sign(const Point& y) const {
  if (dim_ == 1) return 1;
  if (form_ == OperatorForm::SqrtConcave) return sign_of(a_(y)(0, 1));
  for (const auto& b : branches_) {
    double a12 = b.a(y)(0, 1);
    if (a12 != 0.0) return sign_of(a12);
  }
  return 1;
}

int NonlinearOperator::audit(unsigned seed, int probes, std::string* first_failure) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int failures = 0;
  auto fail = [&](const std::string& what) {
    if (failures++ == 0 && first_failure) *first_failure = what;
  };
  auto random_sym = [&]() {
    SymMatrix m = SymMatrix::Zero();
    m(0, 0) = normal(rng);
    if (dim_ == 2) {
      m(1, 1) = normal(rng);
      m(0, 1) = m(1, 0) = normal(rng);
    }
    return m;
  };
  for (int k = 0; k < probes; ++k) {
    SymMatrix M = random_sym(), M2 = random_sym(), B = random_sym();
    SymMatrix N = B * B.transpose();
    if (dim_ == 1) N = SymMatrix::Zero(), N(0, 0) = B(0, 0) * B(0, 0);
    Point x{unit(rng), dim_ == 2 ? unit(rng) : 0.0};
    Point y{unit(rng), dim_ == 2 ? unit(rng) : 0.0};
    double slack = 1e-10 * (1.0 + frob(M, dim_) + frob(M2, dim_) + frob(N, dim_));
    double f = value(M, x, y), f2 = value(M2, x, y);
    if (value(0.5 * (M + M2), x, y) < 0.5 * (f + f2) - slack) fail("concavity probe failed");
    double inc = value(M + N, x, y) - f, tr = trace(N, dim_);
    if (inc < lambda_ * tr - slack || inc > Lambda_ * tr + slack) fail("ellipticity probe failed");
    if (std::abs(f - f2) > std::sqrt(double(dim_)) * Lambda_ * frob(M - M2, dim_) + slack)
      fail("Lipschitz probe failed");
    for (int a = 0; a < dim_; ++a) {
      Point ys = y;
      ys[a] += 1.0;
      if (std::abs(value(M, x, ys) - f) > slack) fail("periodicity probe failed");
    }
    if (dim_ == 2) {
      SymMatrix g = gradient(M, x, y);
      if (g(0, 1) != 0.0 && sign_of(g(0, 1)) != mixed_sign(y)) fail("mixed derivative changes sign");
      if (g(0, 0) < std::abs(g(0, 1)) || g(1, 1) < std::abs(g(0, 1)))
        fail("F_p is not diagonally dominant; no monotone 7-point stencil exists");
    }
  }
  return failures;
}

double box_model_residual(const BoxModel& model, const GridField& u) {
  const auto& g = u.box();
  double r = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (g.on_boundary(p)) continue;
    r = std::max(r, std::abs(model.eval(p, field_hessian(u, p, model.mixed_sign(p))).first));
  }
  return r;
}

GridField solve_box_newton(const BoxModel& model, GridField u, const NewtonOptions& options,
                           NewtonReport* report) {
  const auto& g = u.box();
  const std::size_t n = g.size();
  const double h0 = g.spacing(0), h1 = g.dim == 2 ? g.spacing(1) : 1.0;
  const double hmin = g.dim == 2 ? std::min(h0, h1) : h0;
  std::vector<double> R(n, 0.0);
  std::vector<SymMatrix> G(n, SymMatrix::Zero());
  std::vector<int> sign(n, 1);
  for (std::size_t p = 0; p < n; ++p) sign[p] = g.on_boundary(p) ? 1 : model.mixed_sign(p);
  auto evaluate = [&](const GridField& v, bool with_gradient) {
    double r = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      if (g.on_boundary(p)) continue;
      auto [val, grad] = model.eval(p, field_hessian(v, p, sign[p]));
      R[p] = val;
      if (with_gradient) G[p] = grad;
      r = std::max(r, std::abs(val));
    }
    return r;
  };
  double r = evaluate(u, true);
  NewtonReport rep;
  for (int it = 0; it < options.max_iterations; ++it) {
    double gmax = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      if (!g.on_boundary(p)) gmax = std::max(gmax, G[p].norm());
    // Evaluating D_h^2 u in floating point limits the attainable residual.
    const double floor = 64.0 * DBL_EPSILON * (1.0 + gmax * 4.0 * sup_norm(u) / (hmin * hmin));
    rep.residual = r;
    rep.iterations = it;
    if (r <= options.tol + floor) {
      rep.converged = true;
      break;
    }
    SparseMatrix J = box_assemble(g, [&](std::size_t p) {
      LocalStencil s = signed_stencil(G[p], g.dim, h0, h1, sign[p]);
      audit_monotone(s, "nonlinear Jacobian");
      return s;
    });
    Eigen::VectorXd b(n);
    for (std::size_t p = 0; p < n; ++p) b[Eigen::Index(p)] = g.on_boundary(p) ? 0.0 : -R[p];
    Eigen::VectorXd du = sparse_solve(J, b, "Newton step");
    double t = 1.0;
    GridField trial = u;
    double rt = r;
    int halvings = 0;
    for (; halvings <= options.max_halvings; ++halvings) {
      for (std::size_t p = 0; p < n; ++p) trial[p] = u[p] + t * du[Eigen::Index(p)];
      if (options.full_steps) break;
      rt = evaluate(trial, false);
      if (rt <= (1.0 - 1e-4 * t) * r) break;
      t *= 0.5;
    }
    if (halvings > options.max_halvings) {
      // No descent left: accept if already at the round-off floor.
      rep.converged = r <= 1e3 * (options.tol + floor);
      break;
    }
    u = trial;
    r = evaluate(u, true);
    rep.residual = r;
    rep.iterations = it + 1;
  }
  if (!rep.converged && r <= options.tol) rep.converged = true;
  if (report) *report = rep;
  if (!rep.converged)
    throw SolverError("Newton iteration did not converge (residual " + std::to_string(rep.residual) + ")");
  return u;
}

}  // namespace homog
