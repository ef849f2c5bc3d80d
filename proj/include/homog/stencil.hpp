#pragma once

#include <functional>
#include <vector>

#include <Eigen/Sparse>

#include "homog/grid.hpp"

namespace homog {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

/// Weights on the 3x3 (or 3-point) neighbourhood, indexed [d0 + 1][d1 + 1].
struct LocalStencil {
  std::array<std::array<double, 3>, 3> w{};
  double& at(int d0, int d1) { return w[d0 + 1][d1 + 1]; }
  double at(int d0, int d1) const { return w[d0 + 1][d1 + 1]; }
  double center() const { return at(0, 0); }
  /// Most negative off-centre weight (0 if none).
  double worst_off_center() const;
};

/// a_ij D_ij with the 7-point mixed stencil whose diagonal leg is chosen by
/// `mixed_sign` (+1: (+,+),(-,-); -1: (+,-),(-,+)). Exact on quadratics.
LocalStencil signed_stencil(const SymMatrix& a, int dim, double h0, double h1, int mixed_sign);

/// signed_stencil with the leg following the sign of a_12. Monotone whenever
/// a_ii / h_i^2 >= |a_12| / (h_0 h_1).
LocalStencil monotone_stencil(const SymMatrix& a, int dim, double h0, double h1);

/// a_ij D_ij with the 4-point cross for the mixed term.
LocalStencil cross_stencil(const SymMatrix& a, int dim, double h0, double h1);

/// Throws MonotonicityError when an off-centre weight is negative beyond
/// round-off relative to the centre weight.
void audit_monotone(const LocalStencil& s, const char* where);

/// Hessian approximation at a node: centred D_11, D_22, cross D_12.
/// `value(d0, d1)` returns the field at the offset node.
SymMatrix discrete_hessian(const std::function<double(int, int)>& value, int dim, double h0,
                           double h1);

/// Hessian whose mixed entry uses the signed 7-point leg; matches signed_stencil.
SymMatrix signed_hessian(const std::function<double(int, int)>& value, int dim, double h0, double h1,
                         int mixed_sign);

/// signed_hessian of a torus or box field at node p (box: interior nodes only).
SymMatrix field_hessian(const GridField& u, std::size_t p, int mixed_sign);

using NodeCoefficient = std::function<SymMatrix(std::size_t node)>;

/// a_ij(y_p) D_ij on the torus, monotone stencil, audited.
SparseMatrix torus_operator(const TorusGrid& grid, const NodeCoefficient& a);

/// a_ij(x_p) D_ij on box interior rows; boundary rows are identity.
SparseMatrix box_operator(const BoxGrid& grid, const NodeCoefficient& a);

/// Row-wise assembly from arbitrary local stencils (nonlinear Jacobians).
SparseMatrix torus_assemble(const TorusGrid& grid, const std::function<LocalStencil(std::size_t)>& s);
SparseMatrix box_assemble(const BoxGrid& grid, const std::function<LocalStencil(std::size_t)>& s);

/// LU solve with one step of iterative refinement; throws SolverError.
Eigen::VectorXd sparse_solve(const SparseMatrix& a, const Eigen::VectorXd& b, const char* what);

}  // namespace homog
