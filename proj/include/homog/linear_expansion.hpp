#pragma once

#include <memory>
#include <vector>

#include "homog/effective_solver.hpp"
#include "homog/linear_cell.hpp"
#include "homog/oscillatory_solver.hpp"

namespace homog {

/// Interior correctors w_k(y, x) = sum_{l=2}^k chi^{i1..il}(y) D_{i1..il} psi_{k-l}(x) + psi_k(x),
/// k = 1..m (w_1 = psi_1 since chi^i = 0).
class LinearCorrectors {
 public:
  LinearCorrectors(std::shared_ptr<const EffectiveTensors> tensors, std::shared_ptr<const PsiChain> chain);

  int order() const { return chain_->order; }
  const EffectiveTensors& tensors() const { return *tensors_; }
  const PsiChain& chain() const { return *chain_; }

  /// D_x^{x_order} D_{y_axis} w_k at (y, x); y_axis = -1 means no y-derivative.
  double evaluate(int k, const Point& y, const Point& x, DerivativeKey x_order = {0, 0}, int y_axis = -1) const;

  /// w_k(x/eps, x) on the nodes of `grid`.
  GridField sample(int k, double eps, const BoxGrid& grid) const;

  /// sup over cell x effective nodes of
  /// a D_yy w_k + 2 a D_xy w_{k-1} + a D_xx w_{k-2}, with D_yy the discrete cell operator.
  double cascade_residual(const CoefficientField& A, int k, int outer_stride = 1) const;

 private:
  std::shared_ptr<const EffectiveTensors> tensors_;
  std::shared_ptr<const PsiChain> chain_;
  std::vector<std::pair<IndexTuple, std::vector<GridField>>> chi_terms_;  // chi and its y-gradient
};

/// sum_k eps^k z_k with a(x/eps) D^2 z_k = 0 and z_k = -w_k(x/eps, x) on the faces.
struct BoundaryCorrection {
  std::vector<GridField> z;  // z[k-1] = z_k
  GridField theta;
};

BoundaryCorrection boundary_correctors(const LinearCorrectors& w, const CoefficientField& A, double eps,
                                       const BoxGrid& grid, int min_points_per_period = 16);

/// phi_m^eps(x) = a D_xx w_{m-1} + 2 a D_xy w_m + eps a D_xx w_m at y = x/eps.
GridField residual_phi(const LinearCorrectors& w, const CoefficientField& A, double eps, const BoxGrid& grid);

struct ExpansionResult {
  double eps = 0.0;
  int m = 0;
  GridField u_eps;
  GridField eta;    // u + sum eps^k w_k
  GridField theta;  // sum eps^k z_k
  GridField phi;
  std::vector<GridField> z;
  double error_sup = 0.0;     // |u^eps - eta - theta|
  double theta_sup = 0.0;
  double phi_sup = 0.0;
  /// sup |a D^2 (eta + theta) - f - eps^{m-1} phi| away from the faces,
  /// D^2 eta by fourth-order differencing, D^2 theta by the discrete operator.
  double identity_residual = 0.0;
  double u_eps_residual = 0.0;
};

/// u^eps, eta, theta, phi and the error on a grid with `points_per_period`
/// nodes per oscillation period. `u` is the effective solution on its own grid.
ExpansionResult assemble_expansion(const LinearCorrectors& w, const CoefficientField& A, const GridField& u,
                                   const ScalarFunction& f, const ScalarFunction& g, double eps,
                                   int points_per_period, int min_points_per_period = 16);

/// Fourth-order second difference (4 D_h - D_2h) / 3 along axes (i, j) at node p;
/// requires depth >= 2.
double fourth_order_second_difference(const GridField& v, std::size_t p, int i, int j);

}  // namespace homog
