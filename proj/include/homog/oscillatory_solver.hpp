#pragma once

#include "homog/catalog.hpp"
#include "homog/coefficient.hpp"
#include "homog/nonlinear_operator.hpp"

namespace homog {

/// Grid on `domain`'s box with spacing <= eps / points_per_period.
BoxGrid eps_grid(const BoxGrid& domain, double eps, int points_per_period);

/// Throws ResolutionError unless spacing <= eps / min_points_per_period.
void check_resolution(const BoxGrid& grid, double eps, int min_points_per_period = 16);

inline Point fast_variable(const Point& x, double eps) { return {x[0] / eps, x[1] / eps}; }

/// a_ij(x/eps) D_ij u = rhs, u = boundary on the faces.
GridField solve_eps_linear(const CoefficientField& A, double eps, const GridField& rhs, const GridField& boundary,
                           int min_points_per_period = 16);

/// a_ij(x/eps) D_ij z = 0 with z = trace on the faces.
GridField boundary_corrector_linear(const CoefficientField& A, double eps, const GridField& trace,
                                    int min_points_per_period = 16);

/// F(D^2 u, x, x/eps) = 0, u = boundary on the faces.
GridField solve_eps_nonlinear(const NonlinearOperator& F, double eps, const GridField& boundary,
                              const NewtonOptions& options = {}, NewtonReport* report = nullptr,
                              int min_points_per_period = 16);

/// F(D^2 eta + D^2 theta, x, x/eps) = F(D^2 eta, x, x/eps) with theta = g - eta
/// on the faces; D^2 eta is the discrete Hessian of the sampled eta.
GridField boundary_corrector_nonlinear(const NonlinearOperator& F, double eps, const GridField& eta,
                                       const GridField& boundary, const NewtonOptions& options = {},
                                       NewtonReport* report = nullptr, int min_points_per_period = 16);

/// Pointwise F(D_h^2 v, x, x/eps) at interior nodes (0 on the faces).
GridField discrete_operator(const NonlinearOperator& F, double eps, const GridField& v);

}  // namespace homog
