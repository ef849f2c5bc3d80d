#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "homog/coefficient.hpp"
#include "homog/stencil.hpp"

namespace homog {

/// Penalisation parameters used to approach the singular cell problem.
struct DeltaSchedule {
  std::vector<double> deltas;  // strictly decreasing

  /// 2^-first, ..., 2^-last.
  static DeltaSchedule halving(int first = 4, int last = 14);
  /// 3^-first, ..., 3^-last.
  static DeltaSchedule thirding(int first = 3, int last = 9);
};

enum class CellMethod { Direct, DeltaSchedule };

struct CellOptions {
  CellMethod method = CellMethod::Direct;
  /// Run both methods and require agreement within `tol`.
  bool cross_validate = false;
  double tol = 1e-8;
  DeltaSchedule schedule = DeltaSchedule::halving();
};

struct PenalizedSolution {
  double delta = 0.0;
  GridField w;            // w^delta itself, not normalised
  double delta_w0 = 0.0;  // delta * w^delta(0)
};

struct CellSolution {
  std::optional<SymMatrix> M;  // set when the source is a_ij M_ij
  double gamma = 0.0;
  GridField w;                 // normalised by w(0) = 0
  double residual = 0.0;       // sup |a_ij D_ij w + rhs - gamma|
  /// Richardson-extrapolated estimates along the schedule (delta path only).
  std::vector<double> gamma_estimates;
  /// |gamma_direct - gamma_delta| when cross-validated.
  std::optional<double> cross_check;
};

/// Discrete a_ij D_ij on a torus grid with cached factorisations.
class CellOperator {
 public:
  CellOperator(const CoefficientField& A, const TorusGrid& grid);
  CellOperator(std::vector<SymMatrix> coefficients, const TorusGrid& grid);

  const TorusGrid& grid() const { return grid_; }
  int dim() const { return grid_.dim; }
  const std::vector<SymMatrix>& coefficients() const { return coeff_; }
  const SparseMatrix& matrix() const { return L_; }

  /// Solves a_ij D_ij w + rhs = gamma with w(0) = 0 (constraint-augmented system).
  CellSolution solve_direct(const GridField& rhs) const;
  /// Solves a_ij D_ij w + rhs - delta w = 0.
  PenalizedSolution solve_penalized(const GridField& rhs, double delta) const;
  /// Schedule + one Richardson step on delta w^delta(0); Cauchy-checked.
  CellSolution solve_schedule(const GridField& rhs, const DeltaSchedule& schedule, double tol) const;
  CellSolution solve(const GridField& rhs, const CellOptions& options) const;

  /// sup |a_ij D_ij w + rhs - gamma|.
  double residual(const GridField& w, const GridField& rhs, double gamma) const;
  /// Pointwise a_ij D_ij w.
  GridField apply(const GridField& w) const;

 private:
  TorusGrid grid_;
  std::vector<SymMatrix> coeff_;
  SparseMatrix L_;
  struct Factor;
  std::shared_ptr<Factor> augmented_;
};

PenalizedSolution solve_penalized_cell(const CoefficientField& A, const GridField& rhs, double delta);

CellSolution solve_cell(const CoefficientField& A, const GridField& rhs, const CellOptions& options = {});

/// Cell problem with source a_ij(y) M_ij; gamma is the effective value at M.
CellSolution solve_cell_for_matrix(const CoefficientField& A, const TorusGrid& grid, const SymMatrix& M,
                                   const CellOptions& options = {});

using IndexTuple = std::vector<int>;

struct TensorEntry {
  IndexTuple index;
  double a_bar = 0.0;
  GridField chi;
  double residual = 0.0;
};

/// Effective tensors a_bar_{i1..ik} and correctors chi^{i1..ik} for 2 <= k <= max_order.
/// Conventions: chi of the empty tuple is 1, chi^i is 0.
class EffectiveTensors {
 public:
  EffectiveTensors() = default;
  EffectiveTensors(int dim, int max_order, TorusGrid grid) : dim_(dim), max_order_(max_order), grid_(grid) {}

  int dim() const { return dim_; }
  int max_order() const { return max_order_; }
  const TorusGrid& grid() const { return grid_; }

  bool has(const IndexTuple& t) const { return entries_.count(t) > 0; }
  const TensorEntry& at(const IndexTuple& t) const;
  double a_bar(const IndexTuple& t) const;
  /// chi^t including the order 0 and order 1 conventions.
  GridField chi(const IndexTuple& t) const;
  /// D_{y_axis} chi^t (centred, periodic).
  GridField chi_gradient(const IndexTuple& t, int axis) const;
  SymMatrix a_bar_matrix() const;

  void insert(TensorEntry e);
  const std::map<IndexTuple, TensorEntry>& entries() const { return entries_; }

 private:
  int dim_ = 1;
  int max_order_ = 2;
  TorusGrid grid_;
  std::map<IndexTuple, TensorEntry> entries_;
};

/// All ordered tuples in {0..dim-1}^order, lexicographic.
std::vector<IndexTuple> index_tuples(int dim, int order);

/// Order-2 tensors: a_bar_kl = gamma for source a_kl(y), chi^kl stored.
EffectiveTensors effective_matrix(const CoefficientField& A, const TorusGrid& grid,
                                  const CellOptions& options = {});

/// Higher-order recursion for orders 3..max_order on top of the order-2 tensors.
EffectiveTensors chi_recursion(const CoefficientField& A, const TorusGrid& grid, int max_order,
                               const CellOptions& options = {});

}  // namespace homog
