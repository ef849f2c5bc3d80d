#pragma once

#include <atomic>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "homog/linear_cell.hpp"
#include "homog/nonlinear_operator.hpp"

namespace homog {

struct NonlinearCellOptions {
  CellMethod method = CellMethod::Direct;
  bool cross_validate = false;
  /// Agreement required between methods and of the extrapolated schedule.
  double tol = 1e-7;
  DeltaSchedule schedule = DeltaSchedule::halving(4, 14);
  NewtonOptions newton{1e-10, 60, 30, false};
  /// Pin D_p w at node 0 by a central difference of w instead of v(0) = 0.
  bool fd_pin = false;
};

/// F(D^2 w + M, x, y) = F_bar(M, x) on the torus with w(0) = 0.
struct EffectiveOperatorSample {
  SymMatrix M = SymMatrix::Zero();
  Point x{0.0, 0.0};
  double F_bar = 0.0;
  GridField w;
  double residual = 0.0;
  int newton_iterations = 0;
  std::vector<double> estimates;      // extrapolated schedule values (delta path)
  std::optional<double> cross_check;  // |direct - schedule|
  // Filled by differentiate().
  bool has_derivatives = false;
  SymMatrix dF_dp = SymMatrix::Zero();  // entry (k,l): derivative along unit_matrix(k,l)
  std::array<double, 2> dF_dx{0.0, 0.0};
  std::vector<GridField> chi;  // D_{p_kl} w for (0,0), (1,1), (0,1) as present
};

/// Symmetric directions (k,l) with k <= l in storage order.
std::vector<std::array<int, 2>> symmetric_directions(int dim);

/// Nonlinear cell problems for one operator on one torus grid.
class NonlinearCell {
 public:
  NonlinearCell(const NonlinearOperator& F, TorusGrid grid, NonlinearCellOptions options = {});

  const NonlinearOperator& op() const { return *F_; }
  const TorusGrid& grid() const { return grid_; }
  const NonlinearCellOptions& options() const { return options_; }

  /// F(D^2 w + M, x, y) - delta w = 0.
  PenalizedSolution solve_penalized(const SymMatrix& M, const Point& x, double delta,
                                    const GridField* warm = nullptr) const;
  EffectiveOperatorSample solve_direct(const SymMatrix& M, const Point& x, const GridField* warm = nullptr) const;
  EffectiveOperatorSample solve_schedule(const SymMatrix& M, const Point& x, const GridField* warm = nullptr) const;
  /// Dispatch on options (method, cross validation).
  EffectiveOperatorSample effective_F(const SymMatrix& M, const Point& x, const GridField* warm = nullptr) const;

  /// a_ij(y) = F_p(D^2 w + M, x, y) at the cell nodes; ellipticity checked.
  std::vector<SymMatrix> linearized_coeffs(const EffectiveOperatorSample& s) const;
  /// Fills dF_dp, dF_dx and chi through linearized cell problems.
  void differentiate(EffectiveOperatorSample& s) const;
  /// F_bar, F_bar_p and D_p w at (M, x).
  EffectiveOperatorSample sample(const SymMatrix& M, const Point& x, const GridField* warm = nullptr) const;

  /// d/dM_ij of F_bar_{p_kl} by central differences of the linearized values.
  double second_derivative(const SymMatrix& M, const Point& x, std::array<int, 2> kl, std::array<int, 2> ij,
                           double step = 1e-4) const;

  /// sup |F(D^2 w + M, x, .) - F_bar| over the cell nodes.
  double residual(const GridField& w, const SymMatrix& M, const Point& x, double F_bar) const;

 private:
  struct NewtonResult {
    GridField v;
    double constant = 0.0;
    double residual = 0.0;
    int iterations = 0;
  };
  /// kappa = 1, delta = 0: direct (constant = F_bar);
  /// kappa = delta: penalized with w = v + constant.
  NewtonResult newton(const SymMatrix& M, const Point& x, double kappa, double delta, const GridField* warm) const;

  const NonlinearOperator* F_;
  TorusGrid grid_;
  NonlinearCellOptions options_;
  std::vector<Point> nodes_;
  std::vector<int> sign_;
};

/// Thread-safe memo of F_bar and its first derivatives keyed by (M, x)
/// quantised to 1e-12. Persisted as JSON.
class EffectiveCache {
 public:
  struct Entry {
    double F_bar = 0.0;
    SymMatrix dF_dp = SymMatrix::Zero();
    std::array<double, 2> dF_dx{0.0, 0.0};
  };
  using Key = std::array<long long, 5>;

  static Key key(const SymMatrix& M, const Point& x);
  std::optional<Entry> find(const SymMatrix& M, const Point& x) const;
  void insert(const SymMatrix& M, const Point& x, const Entry& e);
  std::size_t size() const;
  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  mutable std::shared_mutex mutex_;
  std::map<Key, Entry> entries_;
  mutable std::atomic<std::size_t> hits_{0}, misses_{0};
};

}  // namespace homog
