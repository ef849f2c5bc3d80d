#pragma once

#include <map>
#include <memory>
#include <vector>

#include "homog/derivatives.hpp"
#include "homog/interpolation.hpp"
#include "homog/nonlinear_effective.hpp"
#include "homog/oscillatory_solver.hpp"

namespace homog {

/// F_bar with memoisation and per-node warm starts.
class EffectiveOperator {
 public:
  EffectiveOperator(const NonlinearCell& cell, std::shared_ptr<EffectiveCache> cache = nullptr)
      : cell_(&cell), cache_(std::move(cache)) {}
  const NonlinearCell& cell() const { return *cell_; }
  EffectiveCache* cache() const { return cache_.get(); }
  /// Value and F_bar_p at (M, x); `warm` is read as a start and overwritten with w.
  EffectiveCache::Entry evaluate(const SymMatrix& M, const Point& x, GridField* warm = nullptr) const;

 private:
  const NonlinearCell* cell_;
  std::shared_ptr<EffectiveCache> cache_;
};

/// F_bar(D^2 u, x) = 0 in the box, u = g on the faces. Newton with F_bar_p as
/// the Jacobian coefficient.
GridField solve_effective_nl(const EffectiveOperator& F_bar, const GridField& boundary,
                             const NewtonOptions& options = {1e-9, 60, 30, false}, NewtonReport* report = nullptr);

/// Product-grid fields indexed by symmetric direction (0,0), (1,1), (0,1).
using DirectionalField = std::vector<ProductField>;

struct NonlinearHierarchy {
  int m = 2;
  int depth = 2;  // [m/2] + 1
  TorusGrid cell;
  BoxGrid outer;
  GridField u;
  DerivativeSet u_derivatives;
  double effective_residual = 0.0;

  /// w[k](y, x) for k = 0..depth; w[0] and w[1] are y-independent
  /// (w[0] unused, w[1] = psi_1 or 0).
  std::vector<ProductField> w;
  DirectionalField coefficients;  // a_ij(y, x) = F_p(X^0)
  DirectionalField chi;           // D_p w(y; D^2 u(x), x)
  std::vector<GridField> a_bar;   // F_bar_p(D^2 u(x), x) per direction
  double w2_cell_residual = 0.0;

  // m in {4, 5}
  GridField Psi1;  // compatibility constants
  GridField psi1;
  ProductField phi3;
  double w3_cell_residual = 0.0;
  double psi1_residual = 0.0;

  /// X[k][dir] for k = 0..depth.
  std::vector<DirectionalField> X;
  /// sup |F(X^0)| over the product nodes.
  double x0_residual = 0.0;
};

struct NonlinearHierarchyOptions {
  int m = 2;
  /// Nested x-derivatives of w_k differentiate D^2 u again, so the stencils
  /// must keep the error of D^2 u smooth up to the faces.
  DerivativeOptions derivatives{1e-15, 0.1, 1e-8, true, 4};
};

/// Builds u-derivatives, w_2, w_3 (m >= 4) and the X bookkeeping.
NonlinearHierarchy build_hierarchy(const EffectiveOperator& F_bar, const GridField& u,
                                   const NonlinearHierarchyOptions& options = {});

/// w_2(., x) = w(.; D^2 u(x), x) at every effective node, with coefficients and chi.
void build_w2(const EffectiveOperator& F_bar, NonlinearHierarchy& h);
/// Psi_1, phi_3, psi_1 and w_3 = phi_3 + chi^{ij} D_ij psi_1.
void build_w3(const EffectiveOperator& F_bar, NonlinearHierarchy& h, const DerivativeOptions& options = {});
/// X^k = D_xx w_k + 2 D_xy w_{k+1} + D_yy w_{k+2}.
void build_taylor_fields(const NonlinearOperator& F, NonlinearHierarchy& h, const DerivativeOptions& options = {});

/// eta = u + sum_{k=1}^{depth} eps^k w_k(x/eps, x) on `grid`.
GridField assemble_eta_nl(const NonlinearHierarchy& h, double eps, const BoxGrid& grid);

struct TaylorResidual {
  GridField R_tilde;          // F(X^0 + eps Y) at interior nodes
  GridField R_direct;         // F(fourth-order D^2 eta), depth >= 2
  GridField R_discrete;       // F(D_h^2 eta)
  GridField Y_sup;            // |Y^r| (Frobenius) per node
  double sup = 0.0;           // sup |R_tilde|
  double scaled = 0.0;        // sup / eps^(depth - 1)
  double consistency = 0.0;   // sup |R_tilde - R_direct| at depth >= 2
  double discrete_gap = 0.0;  // sup |R_tilde - R_discrete|
  double Y_bound = 0.0;
};

TaylorResidual taylor_residual(const NonlinearOperator& F, const NonlinearHierarchy& h, double eps,
                               const GridField& eta);

struct BarrierReport {
  double error_sup = 0.0;  // |u^eps - eta - theta|
  double bound = 0.0;      // (2 lambda)^-1 C0 eps^(r-1) R^2
  double slack = 0.0;
  double worst_violation = 0.0;  // max over nodes of the bracket violation (<= 0 passes)
  int violations = 0;
  bool passed = false;
};

/// Checks eta + theta -+ (2 lambda)^-1 C0 eps^(r-1) (R^2 - |x - c|^2) brackets u^eps.
BarrierReport verify_barrier(const GridField& u_eps, const GridField& eta, const GridField& theta, double eps,
                             int depth, double lambda, double C0, double radius, double slack);

struct NonlinearExpansionResult {
  double eps = 0.0;
  int m = 2;
  GridField u_eps, eta, theta;
  TaylorResidual taylor;
  BarrierReport barrier;
  double error_sup = 0.0;
  double theta_sup = 0.0;
  double C0 = 0.0;
  int u_eps_iterations = 0;
};

/// u^eps, eta, theta, Taylor residual and barrier check at one eps.
NonlinearExpansionResult assemble_expansion_nl(const NonlinearOperator& F, const NonlinearHierarchy& h,
                                               const ScalarFunction& g, double eps, int points_per_period,
                                               int min_points_per_period = 16,
                                               const NewtonOptions& newton = {1e-10, 60, 30, false});

}  // namespace homog
