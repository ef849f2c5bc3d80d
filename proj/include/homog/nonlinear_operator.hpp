#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "homog/coefficient.hpp"
#include "homog/stencil.hpp"

namespace homog {

enum class OperatorForm { Linear, MinOfLinear, SqrtConcave };

/// One affine branch a_ij(y) M_ij - source(x).
struct LinearBranch {
  CoefficientField a;
  ScalarFunction source;
};

/// Concave, uniformly elliptic F(M, x, y), 1-periodic in y.
///
///   linear        a_ij(y) M_ij - f(x)
///   min_of_linear min_k (a^k_ij(y) M_ij - f_k(x))
///   sqrt_concave  a_ij(y) M_ij - c(y) sum_i sqrt(1 + M_ii^2) - f(x)
///
/// Ellipticity is measured with the trace of the nonnegative increment:
/// lambda tr N <= F(M + N) - F(M) <= Lambda tr N. In 2D the derivative
/// F_{p_12} must keep one sign per y so the discrete Hessian can pick a
/// monotone mixed stencil; `mixed_sign` reports it.
class NonlinearOperator {
 public:
  static NonlinearOperator linear(CoefficientField a, ScalarFunction source);
  static NonlinearOperator min_of_linear(std::vector<LinearBranch> branches);
  static NonlinearOperator sqrt_concave(CoefficientField a, ScalarFunction curvature, ScalarFunction source);

  int dim() const { return dim_; }
  OperatorForm form() const { return form_; }
  bool smooth() const { return form_ != OperatorForm::MinOfLinear; }
  const std::string& description() const { return description_; }

  double value(const SymMatrix& M, const Point& x, const Point& y) const;
  /// F_p; at kinks of min_of_linear the active (lowest-index minimal) branch.
  SymMatrix gradient(const SymMatrix& M, const Point& x, const Point& y) const;
  /// Value and gradient together.
  std::pair<double, SymMatrix> evaluate(const SymMatrix& M, const Point& x, const Point& y) const;
  /// Second derivative d^2 F / dM_ij dM_kl applied to (N, N).
  double second_variation(const SymMatrix& M, const Point& x, const Point& y, const SymMatrix& N) const;
  /// F_x by central differences.
  std::array<double, 2> x_gradient(const SymMatrix& M, const Point& x, const Point& y) const;
  int active_branch(const SymMatrix& M, const Point& x, const Point& y) const;
  int mixed_sign(const Point& y) const;

  double lambda() const { return lambda_; }
  double Lambda() const { return Lambda_; }
  double sigma() const { return sigma_; }
  /// Bound tau_L on |F(M,x,y) - F(M,x',y)| / |x - x'| over |M| <= L.
  double tau(double L) const { return tau0_ * (1.0 + L); }

  /// Random structural probes of concavity, ellipticity, Lipschitz bounds and
  /// periodicity. Returns the number of failed probes.
  int audit(unsigned seed, int probes, std::string* first_failure = nullptr) const;

  const std::vector<LinearBranch>& branches() const { return branches_; }

 private:
  NonlinearOperator() = default;
  void finish();

  int dim_ = 1;
  OperatorForm form_ = OperatorForm::Linear;
  std::string description_;
  std::vector<LinearBranch> branches_;  // Linear and MinOfLinear
  CoefficientField a_;                  // SqrtConcave
  ScalarFunction curvature_;
  ScalarFunction source_;
  double lambda_ = 0.0, Lambda_ = 0.0, sigma_ = 0.0, tau0_ = 0.0;
};

/// Controls for the damped Newton / policy iteration engines.
struct NewtonOptions {
  double tol = 1e-11;   // sup residual, relative to 1 + initial residual scale
  int max_iterations = 60;
  int max_halvings = 30;
  /// Take undamped steps (policy iteration for min-type operators).
  bool full_steps = false;
};

struct NewtonReport {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Pointwise nonlinearity for box Dirichlet problems: value and gradient of
/// G_p(H) at node p, where H is the discrete Hessian.
struct BoxModel {
  std::function<std::pair<double, SymMatrix>(std::size_t, const SymMatrix&)> eval;
  std::function<int(std::size_t)> mixed_sign;
};

/// Solves G_p(D_h^2 u) = 0 at interior nodes with u fixed on the boundary
/// nodes of `initial`. Newton with backtracking; min-type models reduce to
/// policy iteration. Throws SolverError on failure.
GridField solve_box_newton(const BoxModel& model, GridField initial, const NewtonOptions& options,
                           NewtonReport* report = nullptr);

/// sup over interior nodes of |G_p(D_h^2 u)|.
double box_model_residual(const BoxModel& model, const GridField& u);

}  // namespace homog
