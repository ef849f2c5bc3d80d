#pragma once

#include <functional>
#include <vector>

#include "homog/catalog.hpp"
#include "homog/derivatives.hpp"
#include "homog/linear_cell.hpp"

namespace homog {

/// Field on the box sampled from a closed-form function.
GridField sample_box(const BoxGrid& grid, const ScalarFunction& f);

/// Solves a_ij(x) D_ij u = rhs in the box with u = boundary on the faces.
/// Only the boundary nodes of `boundary` are read.
GridField solve_dirichlet(const BoxGrid& grid, const std::function<SymMatrix(std::size_t)>& a,
                          const GridField& rhs, const GridField& boundary);

/// Constant-coefficient effective problem a_bar_ij D_ij u = f, u = g on the faces.
/// Throws AdmissibilityError unless a_bar is positive definite.
GridField solve_effective_dirichlet(const SymMatrix& a_bar, const GridField& rhs, const GridField& boundary);

/// sup over interior nodes of |a_ij D_ij u - rhs|.
double dirichlet_residual(const BoxGrid& grid, const std::function<SymMatrix(std::size_t)>& a,
                          const GridField& u, const GridField& rhs);

/// Boundary-layer-free hierarchy psi_0 = u, psi_1, ..., psi_m with
/// a_bar_ij D_ij psi_k = - sum_{l=3}^{k+2} a_bar_{i1..il} D^l psi_{k-l+2},
/// psi_k = 0 on the faces for 1 <= k <= m-2, and psi_{m-1} = psi_m = 0.
struct PsiChain {
  int order = 0;
  std::vector<GridField> psi;
  /// Derivatives of psi_j up to total order order - j + 2.
  std::vector<DerivativeSet> derivatives;
  std::vector<double> residuals;
};

PsiChain solve_psi_chain(const EffectiveTensors& tensors, const GridField& u, int m,
                         const DerivativeOptions& options = {});

/// sum over ordered tuples t of order l: a_bar_t D_t psi.
GridField contract_tensor(const EffectiveTensors& tensors, int order, const DerivativeSet& d);

}  // namespace homog
