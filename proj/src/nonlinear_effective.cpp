#include "homog/nonlinear_effective.hpp"

#include <cfloat>
#include <cmath>
#include <fstream>
#include <mutex>

#include <Eigen/SparseLU>
#include <nlohmann/json.hpp>

namespace homog {

std::vector<std::array<int, 2>> symmetric_directions(int dim) {
  if (dim == 1) return {{0, 0}};
  return {{0, 0}, {1, 1}, {0, 1}};
}

NonlinearCell::NonlinearCell(const NonlinearOperator& F, TorusGrid grid, NonlinearCellOptions options)
    : F_(&F), grid_(grid), options_(std::move(options)) {
  if (F.dim() != grid.dim) throw ConfigError("operator and cell grid dimensions differ");
  nodes_.resize(grid_.size());
  sign_.resize(grid_.size());
  for (std::size_t p = 0; p < grid_.size(); ++p) {
    nodes_[p] = grid_.node(p);
    sign_[p] = F.mixed_sign(nodes_[p]);
  }
}

NonlinearCell::NewtonResult NonlinearCell::newton(const SymMatrix& M, const Point& x, double kappa, double delta,
                                                  const GridField* warm) const {
  const std::size_t n = grid_.size();
  const double h = grid_.spacing();
  const NewtonOptions& opt = options_.newton;
  const bool full = opt.full_steps || !F_->smooth();
  NewtonResult res;
  res.v = GridField(grid_);
  if (warm)
    for (std::size_t p = 0; p < n; ++p) res.v[p] = (*warm)[p] - (*warm)[0];
  std::vector<double> R(n);
  std::vector<SymMatrix> G(n);
  double fmax = 0.0;
  auto evaluate = [&](const GridField& v, double c, bool grad) {
    double r = 0.0;
    fmax = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      auto [val, g] = F_->evaluate(field_hessian(v, p, sign_[p]) + M, x, nodes_[p]);
      fmax = std::max(fmax, std::abs(val));
      R[p] = val - kappa * c - delta * v[p];
      if (grad) G[p] = g;
      r = std::max(r, std::abs(R[p]));
    }
    return r;
  };
  // Start the constant from the mean of F so the first residual is balanced.
  {
    double mean = 0.0;
    for (std::size_t p = 0; p < n; ++p) mean += F_->value(field_hessian(res.v, p, sign_[p]) + M, x, nodes_[p]);
    res.constant = mean / double(n) / kappa;
  }
  double r = evaluate(res.v, res.constant, true);
  bool converged = false;
  for (int it = 0; it < opt.max_iterations; ++it) {
    double gmax = 0.0;
    for (const auto& g : G) gmax = std::max(gmax, g.norm());
    const double floor =
        64.0 * DBL_EPSILON * (1.0 + fmax + gmax * (4.0 * grid_.dim * sup_norm(res.v) / (h * h) + M.norm()));
    res.residual = r;
    res.iterations = it;
    if (r <= opt.tol + floor) {
      converged = true;
      break;
    }
    SparseMatrix L = torus_assemble(grid_, [&](std::size_t p) {
      LocalStencil s = signed_stencil(G[p], grid_.dim, h, h, sign_[p]);
      audit_monotone(s, "nonlinear cell Jacobian");
      s.at(0, 0) -= delta;
      return s;
    });
    // Column 0 carries the constant; v(0) stays pinned at zero.
    Triplets t;
    for (int k = 0; k < L.outerSize(); ++k)
      for (SparseMatrix::InnerIterator e(L, k); e; ++e)
        if (e.col() != 0) t.emplace_back(int(e.row()), int(e.col()), e.value());
    for (std::size_t p = 0; p < n; ++p) t.emplace_back(int(p), 0, -kappa);
    SparseMatrix J(L.rows(), L.cols());
    J.setFromTriplets(t.begin(), t.end());
    Eigen::VectorXd b(n);
    for (std::size_t p = 0; p < n; ++p) b[Eigen::Index(p)] = -R[p];
    Eigen::VectorXd dz = sparse_solve(J, b, "nonlinear cell Newton step");
    double step = 1.0;
    GridField trial = res.v;
    double ct = res.constant;
    int halvings = 0;
    for (; halvings <= opt.max_halvings; ++halvings) {
      ct = res.constant + step * dz[0];
      for (std::size_t p = 1; p < n; ++p) trial[p] = res.v[p] + step * dz[Eigen::Index(p)];
      if (full) break;
      if (evaluate(trial, ct, false) <= (1.0 - 1e-4 * step) * r) break;
      step *= 0.5;
    }
    if (halvings > opt.max_halvings) {
      converged = r <= 1e3 * (opt.tol + floor);
      break;
    }
    res.v = trial;
    res.constant = ct;
    r = evaluate(res.v, res.constant, true);
    res.residual = r;
    res.iterations = it + 1;
  }
  if (!converged && r <= opt.tol) converged = true;
  if (!converged)
    throw SolverError("nonlinear cell problem: Newton did not converge (residual " + std::to_string(r) + ")");
  return res;
}

double NonlinearCell::residual(const GridField& w, const SymMatrix& M, const Point& x, double F_bar) const {
  double r = 0.0;
  for (std::size_t p = 0; p < grid_.size(); ++p)
    r = std::max(r, std::abs(F_->value(field_hessian(w, p, sign_[p]) + M, x, nodes_[p]) - F_bar));
  return r;
}

PenalizedSolution NonlinearCell::solve_penalized(const SymMatrix& M, const Point& x, double delta,
                                                 const GridField* warm) const {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("penalisation delta must lie in (0, 1)");
  NewtonResult nr = newton(M, x, delta, delta, warm);
  PenalizedSolution s;
  s.delta = delta;
  s.w = nr.v;
  for (auto& v : s.w.values()) v += nr.constant;
  s.delta_w0 = delta * nr.constant;
  return s;
}

EffectiveOperatorSample NonlinearCell::solve_direct(const SymMatrix& M, const Point& x,
                                                    const GridField* warm) const {
  NewtonResult nr = newton(M, x, 1.0, 0.0, warm);
  EffectiveOperatorSample s;
  s.M = M;
  s.x = x;
  s.F_bar = nr.constant;
  s.w = std::move(nr.v);
  s.newton_iterations = nr.iterations;
  s.residual = residual(s.w, M, x, s.F_bar);
  return s;
}

EffectiveOperatorSample NonlinearCell::solve_schedule(const SymMatrix& M, const Point& x,
                                                      const GridField* warm) const {
  const auto& d = options_.schedule.deltas;
  if (d.size() < 3) throw ConfigError("delta schedule needs at least three values");
  for (std::size_t j = 1; j < d.size(); ++j)
    if (!(d[j] < d[j - 1])) throw ConfigError("delta schedule must be strictly decreasing");
  std::vector<NewtonResult> runs;
  EffectiveOperatorSample s;
  runs.reserve(d.size());
  const GridField* start = warm;
  for (double delta : d) {
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("penalisation delta must lie in (0, 1)");
    runs.push_back(newton(M, x, delta, delta, start));
    s.newton_iterations += runs.back().iterations;
    start = &runs.back().v;
  }
  for (std::size_t j = 0; j + 1 < runs.size(); ++j) {
    double da = d[j], db = d[j + 1];
    s.estimates.push_back((da * db * runs[j + 1].constant - db * da * runs[j].constant) / (da - db));
  }
  const std::size_t k = s.estimates.size();
  s.F_bar = s.estimates.back();
  double last = std::abs(s.estimates[k - 1] - s.estimates[k - 2]);
  double prev = std::abs(s.estimates[k - 2] - s.estimates[k - 3]);
  if (last > options_.tol * (1.0 + std::abs(s.F_bar)) && last > prev)
    throw SolverError("nonlinear delta schedule: extrapolated estimates are not Cauchy (last step " +
                      std::to_string(last) + ")");
  const auto& ra = runs[runs.size() - 2];
  const auto& rb = runs.back();
  const double da = d[d.size() - 2], db = d.back();
  s.w = GridField(grid_);
  for (std::size_t p = 0; p < grid_.size(); ++p) s.w[p] = (da * rb.v[p] - db * ra.v[p]) / (da - db);
  s.M = M;
  s.x = x;
  s.residual = residual(s.w, M, x, s.F_bar);
  return s;
}

EffectiveOperatorSample NonlinearCell::effective_F(const SymMatrix& M, const Point& x,
                                                   const GridField* warm) const {
  if (!options_.cross_validate)
    return options_.method == CellMethod::Direct ? solve_direct(M, x, warm) : solve_schedule(M, x, warm);
  EffectiveOperatorSample direct = solve_direct(M, x, warm);
  EffectiveOperatorSample sched = solve_schedule(M, x, warm);
  double dg = std::abs(direct.F_bar - sched.F_bar);
  double dw = sup_diff(direct.w, sched.w);
  double scale = 1.0 + std::abs(direct.F_bar) + sup_norm(direct.w);
  if (dg > options_.tol * scale || dw > options_.tol * scale)
    throw SolverError("nonlinear cell problem: direct and delta-schedule solutions disagree (F_bar diff " +
                      std::to_string(dg) + ", w diff " + std::to_string(dw) + ")");
  EffectiveOperatorSample& out = options_.method == CellMethod::Direct ? direct : sched;
  out.cross_check = dg;
  if (options_.method == CellMethod::Direct) out.estimates = sched.estimates;
  return out;
}

std::vector<SymMatrix> NonlinearCell::linearized_coeffs(const EffectiveOperatorSample& s) const {
  std::vector<SymMatrix> a(grid_.size());
  const double slack = 1e-10 * (1.0 + F_->Lambda());
  for (std::size_t p = 0; p < grid_.size(); ++p) {
    a[p] = F_->gradient(field_hessian(s.w, p, sign_[p]) + s.M, s.x, nodes_[p]);
    auto ev = eigenvalues(a[p], grid_.dim);
    if (ev[0] < F_->lambda() - slack || ev[grid_.dim - 1] > F_->Lambda() + slack)
      throw AdmissibilityError("linearized coefficients leave the ellipticity bounds");
  }
  return a;
}

void NonlinearCell::differentiate(EffectiveOperatorSample& s) const {
  const std::size_t n = grid_.size();
  std::vector<SymMatrix> a = linearized_coeffs(s);
  std::vector<std::array<double, 2>> bx(n);
  for (std::size_t p = 0; p < n; ++p)
    bx[p] = F_->x_gradient(field_hessian(s.w, p, sign_[p]) + s.M, s.x, nodes_[p]);
  CellOperator op(a, grid_);
  s.chi.clear();
  for (auto [k, l] : symmetric_directions(grid_.dim)) {
    GridField rhs(grid_);
    for (std::size_t p = 0; p < n; ++p) rhs[p] = a[p](k, l);
    CellSolution c = op.solve_direct(rhs);
    s.dF_dp(k, l) = s.dF_dp(l, k) = c.gamma;
    if (options_.fd_pin) {
      // D_p w(0) from a central difference of w itself.
      const double h = 1e-6 * (1.0 + s.M.norm());
      EffectiveOperatorSample plus = effective_F(s.M + h * unit_matrix(k, l), s.x, &s.w);
      EffectiveOperatorSample minus = effective_F(s.M - h * unit_matrix(k, l), s.x, &s.w);
      double pin = (plus.w[0] - minus.w[0]) / (2.0 * h);
      for (auto& v : c.w.values()) v += pin;
    }
    s.chi.push_back(std::move(c.w));
  }
  for (int k = 0; k < grid_.dim; ++k) {
    GridField rhs(grid_);
    for (std::size_t p = 0; p < n; ++p) rhs[p] = bx[p][k];
    s.dF_dx[k] = op.solve_direct(rhs).gamma;
  }
  s.has_derivatives = true;
}

EffectiveOperatorSample NonlinearCell::sample(const SymMatrix& M, const Point& x, const GridField* warm) const {
  EffectiveOperatorSample s = effective_F(M, x, warm);
  differentiate(s);
  return s;
}

double NonlinearCell::second_derivative(const SymMatrix& M, const Point& x, std::array<int, 2> kl,
                                        std::array<int, 2> ij, double step) const {
  const double h = step * (1.0 + M.norm());
  EffectiveOperatorSample plus = sample(M + h * unit_matrix(ij[0], ij[1]), x);
  EffectiveOperatorSample minus = sample(M - h * unit_matrix(ij[0], ij[1]), x);
  return (plus.dF_dp(kl[0], kl[1]) - minus.dF_dp(kl[0], kl[1])) / (2.0 * h);
}

EffectiveCache::Key EffectiveCache::key(const SymMatrix& M, const Point& x) {
  auto q = [](double v) { return static_cast<long long>(std::llround(v * 1e12)); };
  return {q(M(0, 0)), q(M(1, 1)), q(M(0, 1)), q(x[0]), q(x[1])};
}

std::optional<EffectiveCache::Entry> EffectiveCache::find(const SymMatrix& M, const Point& x) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key(M, x));
  if (it == entries_.end()) {
    ++misses_;
    return std::nullopt;
  }
  ++hits_;
  return it->second;
}

void EffectiveCache::insert(const SymMatrix& M, const Point& x, const Entry& e) {
  std::unique_lock lock(mutex_);
  entries_[key(M, x)] = e;
}

std::size_t EffectiveCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

void EffectiveCache::save(const std::string& path) const {
  nlohmann::json rows = nlohmann::json::array();
  {
    std::shared_lock lock(mutex_);
    for (const auto& [k, e] : entries_)
      rows.push_back({{"key", k},
                      {"F_bar", e.F_bar},
                      {"dF_dp", {e.dF_dp(0, 0), e.dF_dp(1, 1), e.dF_dp(0, 1)}},
                      {"dF_dx", e.dF_dx}});
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write cache file " + path);
  out << rows.dump(1) << '\n';
}

void EffectiveCache::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read cache file " + path);
  nlohmann::json rows;
  try {
    in >> rows;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed cache file " + path + ": " + e.what());
  }
  std::unique_lock lock(mutex_);
  for (const auto& r : rows) {
    Entry e;
    e.F_bar = r.at("F_bar").get<double>();
    auto p = r.at("dF_dp").get<std::array<double, 3>>();
    e.dF_dp << p[0], p[2], p[2], p[1];
    e.dF_dx = r.at("dF_dx").get<std::array<double, 2>>();
    entries_[r.at("key").get<Key>()] = e;
  }
}

}  // namespace homog
