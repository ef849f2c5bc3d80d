#include "homog/linear_cell.hpp"

#include <cmath>
#include <string>

#include <Eigen/SparseLU>

namespace homog {

DeltaSchedule DeltaSchedule::halving(int first, int last) {
  DeltaSchedule s;
  for (int j = first; j <= last; ++j) s.deltas.push_back(std::ldexp(1.0, -j));
  return s;
}

DeltaSchedule DeltaSchedule::thirding(int first, int last) {
  DeltaSchedule s;
  for (int j = first; j <= last; ++j) s.deltas.push_back(std::pow(3.0, -j));
  return s;
}

struct CellOperator::Factor {
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  SparseMatrix matrix;
};

CellOperator::CellOperator(const CoefficientField& A, const TorusGrid& grid)
    : CellOperator(A.sample(grid), grid) {}

CellOperator::CellOperator(std::vector<SymMatrix> coefficients, const TorusGrid& grid)
    : grid_(grid), coeff_(std::move(coefficients)) {
  if (coeff_.size() != grid_.size()) throw Error("coefficient samples do not match the cell grid");
  L_ = torus_operator(grid_, [this](std::size_t p) { return coeff_[p]; });
}

GridField CellOperator::apply(const GridField& w) const {
  Eigen::Map<const Eigen::VectorXd> v(w.values().data(), Eigen::Index(w.values().size()));
  Eigen::VectorXd r = L_ * v;
  GridField out(grid_);
  for (std::size_t p = 0; p < grid_.size(); ++p) out[p] = r[Eigen::Index(p)];
  return out;
}

double CellOperator::residual(const GridField& w, const GridField& rhs, double gamma) const {
  GridField lw = apply(w);
  double r = 0.0;
  for (std::size_t p = 0; p < grid_.size(); ++p) r = std::max(r, std::abs(lw[p] + rhs[p] - gamma));
  return r;
}

CellSolution CellOperator::solve_direct(const GridField& rhs) const {
  if (rhs.nodes() != grid_.size()) throw Error("cell source does not match the cell grid");
  auto* self = const_cast<CellOperator*>(this);
  if (!augmented_) {
    // Column 0 carries gamma instead of w(0), which is pinned to zero.
    auto f = std::make_shared<Factor>();
    SparseMatrix B = L_;
    Triplets t;
    for (int k = 0; k < B.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(B, k); it; ++it)
        if (it.col() != 0) t.emplace_back(int(it.row()), int(it.col()), it.value());
    for (std::size_t p = 0; p < grid_.size(); ++p) t.emplace_back(int(p), 0, -1.0);
    f->matrix.resize(B.rows(), B.cols());
    f->matrix.setFromTriplets(t.begin(), t.end());
    f->lu.compute(f->matrix);
    if (f->lu.info() != Eigen::Success) throw SolverError("cell problem: factorization failed");
    self->augmented_ = f;
  }
  Eigen::VectorXd b(grid_.size());
  for (std::size_t p = 0; p < grid_.size(); ++p) b[Eigen::Index(p)] = -rhs[p];
  Eigen::VectorXd z = augmented_->lu.solve(b);
  z += augmented_->lu.solve(b - augmented_->matrix * z);
  if (!z.allFinite()) throw SolverError("cell problem: non-finite solution");
  CellSolution s;
  s.gamma = z[0];
  s.w = GridField(grid_);
  for (std::size_t p = 1; p < grid_.size(); ++p) s.w[p] = z[Eigen::Index(p)];
  s.residual = residual(s.w, rhs, s.gamma);
  return s;
}

PenalizedSolution CellOperator::solve_penalized(const GridField& rhs, double delta) const {
  if (!(delta > 0.0)) throw ConfigError("penalisation delta must be positive");
  const Eigen::Index n = Eigen::Index(grid_.size());
  SparseMatrix A = L_;
  for (Eigen::Index p = 0; p < n; ++p) A.coeffRef(p, p) -= delta;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw SolverError("penalized cell problem: factorization failed");
  // The stored diagonal cannot resolve a small delta against a_ii / h^2, so
  // residuals use the difference form sum_q L_pq (w_q - w_p) in long double
  // and the factorisation only serves as a preconditioner.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r(n);
  const SparseMatrix Lt = L_.transpose();
  for (int sweep = 0; sweep < 8; ++sweep) {
    for (Eigen::Index p = 0; p < n; ++p) r[p] = -rhs[std::size_t(p)];
    for (Eigen::Index p = 0; p < n; ++p) {
      long double acc = (long double)delta * x[p];
      for (SparseMatrix::InnerIterator it(Lt, p); it; ++it)
        if (it.row() != p) acc -= (long double)it.value() * ((long double)x[it.row()] - x[p]);
      r[p] = double((long double)r[p] + acc);
    }
    Eigen::VectorXd dx = lu.solve(r);
    x += dx;
    if (!x.allFinite()) throw SolverError("penalized cell problem: non-finite solution");
    if (dx.lpNorm<Eigen::Infinity>() <= 1e-17 * x.lpNorm<Eigen::Infinity>()) break;
  }
  PenalizedSolution s;
  s.delta = delta;
  s.w = GridField(grid_);
  for (std::size_t p = 0; p < grid_.size(); ++p) s.w[p] = x[Eigen::Index(p)];
  s.delta_w0 = delta * s.w[0];
  return s;
}

CellSolution CellOperator::solve_schedule(const GridField& rhs, const DeltaSchedule& schedule,
                                          double tol) const {
  const auto& d = schedule.deltas;
  if (d.size() < 3) throw ConfigError("delta schedule needs at least three values");
  for (std::size_t j = 1; j < d.size(); ++j)
    if (!(d[j] < d[j - 1])) throw ConfigError("delta schedule must be strictly decreasing");
  std::vector<PenalizedSolution> runs;
  for (double delta : d) runs.push_back(solve_penalized(rhs, delta));
  CellSolution s;
  // delta w^delta(0) = gamma + c delta + O(delta^2); eliminate the linear term.
  for (std::size_t j = 0; j + 1 < runs.size(); ++j) {
    double da = runs[j].delta, db = runs[j + 1].delta;
    s.gamma_estimates.push_back((da * runs[j + 1].delta_w0 - db * runs[j].delta_w0) / (da - db));
  }
  const std::size_t k = s.gamma_estimates.size();
  s.gamma = s.gamma_estimates.back();
  double last_step = std::abs(s.gamma_estimates[k - 1] - s.gamma_estimates[k - 2]);
  double prev_step = std::abs(s.gamma_estimates[k - 2] - s.gamma_estimates[k - 3]);
  if (last_step > tol * (1.0 + std::abs(s.gamma)) && last_step > prev_step)
    throw SolverError("delta schedule: extrapolated estimates are not Cauchy (last step " +
                      std::to_string(last_step) + ")");
  const auto& ra = runs[runs.size() - 2];
  const auto& rb = runs.back();
  s.w = GridField(grid_);
  for (std::size_t p = 0; p < grid_.size(); ++p) {
    double wa = ra.w[p] - ra.w[0], wb = rb.w[p] - rb.w[0];
    s.w[p] = (ra.delta * wb - rb.delta * wa) / (ra.delta - rb.delta);
  }
  s.residual = residual(s.w, rhs, s.gamma);
  return s;
}

CellSolution CellOperator::solve(const GridField& rhs, const CellOptions& options) const {
  if (!options.cross_validate) {
    return options.method == CellMethod::Direct ? solve_direct(rhs)
                                                : solve_schedule(rhs, options.schedule, options.tol);
  }
  CellSolution direct = solve_direct(rhs);
  CellSolution sched = solve_schedule(rhs, options.schedule, options.tol);
  double dg = std::abs(direct.gamma - sched.gamma);
  double dw = sup_diff(direct.w, sched.w);
  double scale = 1.0 + std::abs(direct.gamma) + sup_norm(direct.w);
  if (dg > options.tol * scale || dw > options.tol * scale)
    throw SolverError("cell problem: direct and delta-schedule solutions disagree (gamma diff " +
                      std::to_string(dg) + ", w diff " + std::to_string(dw) + ")");
  CellSolution& out = options.method == CellMethod::Direct ? direct : sched;
  out.cross_check = dg;
  if (options.method == CellMethod::Direct) out.gamma_estimates = sched.gamma_estimates;
  return out;
}

PenalizedSolution solve_penalized_cell(const CoefficientField& A, const GridField& rhs, double delta) {
  return CellOperator(A, rhs.torus()).solve_penalized(rhs, delta);
}

CellSolution solve_cell(const CoefficientField& A, const GridField& rhs, const CellOptions& options) {
  return CellOperator(A, rhs.torus()).solve(rhs, options);
}

CellSolution solve_cell_for_matrix(const CoefficientField& A, const TorusGrid& grid, const SymMatrix& M,
                                   const CellOptions& options) {
  GridField rhs(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) rhs[p] = contract(A(grid.node(p)), M, grid.dim);
  CellSolution s = solve_cell(A, rhs, options);
  s.M = M;
  return s;
}

std::vector<IndexTuple> index_tuples(int dim, int order) {
  std::vector<IndexTuple> out;
  IndexTuple t(order, 0);
  while (true) {
    out.push_back(t);
    int k = order - 1;
    while (k >= 0 && t[k] == dim - 1) t[k--] = 0;
    if (k < 0) break;
    ++t[k];
  }
  return out;
}

const TensorEntry& EffectiveTensors::at(const IndexTuple& t) const {
  auto it = entries_.find(t);
  if (it == entries_.end()) throw Error("no effective tensor entry for the requested index tuple");
  return it->second;
}

double EffectiveTensors::a_bar(const IndexTuple& t) const { return at(t).a_bar; }

GridField EffectiveTensors::chi(const IndexTuple& t) const {
  if (t.empty()) return GridField(grid_, 1, 1.0);
  if (t.size() == 1) return GridField(grid_, 1, 0.0);
  return at(t).chi;
}

GridField EffectiveTensors::chi_gradient(const IndexTuple& t, int axis) const {
  if (t.size() < 2) return GridField(grid_, 1, 0.0);
  return first_difference(at(t).chi, axis);
}

SymMatrix EffectiveTensors::a_bar_matrix() const {
  SymMatrix m = SymMatrix::Zero();
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) m(i, j) = a_bar({i, j});
  return m;
}

void EffectiveTensors::insert(TensorEntry e) {
  IndexTuple key = e.index;
  entries_[key] = std::move(e);
}

EffectiveTensors effective_matrix(const CoefficientField& A, const TorusGrid& grid,
                                  const CellOptions& options) {
  return chi_recursion(A, grid, 2, options);
}

EffectiveTensors chi_recursion(const CoefficientField& A, const TorusGrid& grid, int max_order,
                               const CellOptions& options) {
  if (A.dim() != grid.dim) throw ConfigError("coefficient and cell grid dimensions differ");
  if (max_order < 2) throw ConfigError("tensor order must be at least 2");
  CellOperator op(A, grid);
  EffectiveTensors tensors(grid.dim, max_order, grid);
  const auto& a = op.coefficients();
  for (int k = 2; k <= max_order; ++k) {
    for (const auto& t : index_tuples(grid.dim, k)) {
      // 2 a_{i_k j} D_j chi^{i_1..i_{k-1}} + a_{i_{k-1} i_k} chi^{i_1..i_{k-2}}
      const int ik = t[k - 1], ik1 = t[k - 2];
      IndexTuple head1(t.begin(), t.end() - 1), head2(t.begin(), t.end() - 2);
      GridField chi2 = tensors.chi(head2);
      std::vector<GridField> grad;
      if (head1.size() >= 2)
        for (int j = 0; j < grid.dim; ++j) grad.push_back(tensors.chi_gradient(head1, j));
      GridField rhs(grid);
      for (std::size_t p = 0; p < grid.size(); ++p) {
        double v = a[p](ik1, ik) * chi2[p];
        for (std::size_t j = 0; j < grad.size(); ++j) v += 2.0 * a[p](ik, int(j)) * grad[j][p];
        rhs[p] = v;
      }
      CellSolution s = op.solve(rhs, options);
      tensors.insert({t, s.gamma, std::move(s.w), s.residual});
    }
  }
  return tensors;
}

}  // namespace homog
