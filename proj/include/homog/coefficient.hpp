#pragma once

#include <functional>
#include <string>
#include <vector>

#include "homog/catalog.hpp"
#include "homog/grid.hpp"

namespace homog {

/// Periodic, symmetric, uniformly elliptic matrix field A(y).
///
/// Construction samples the field, checks periodicity and ellipticity, and
/// records the measured bounds lambda <= eig(A) <= Lambda and a Lipschitz
/// estimate sigma.
class CoefficientField {
 public:
  using Evaluator = std::function<SymMatrix(const Point&)>;

  CoefficientField() = default;
  CoefficientField(int dim, Evaluator eval, std::string description);

  /// 1D coefficient a(y).
  static CoefficientField scalar(const ScalarFunction& a);
  /// 2D entries; a12 defaults to zero.
  static CoefficientField entries(const ScalarFunction& a11, const ScalarFunction& a22,
                                  const ScalarFunction* a12 = nullptr);

  int dim() const { return dim_; }
  SymMatrix operator()(const Point& y) const { return eval_(y); }
  double lambda() const { return lambda_; }
  double Lambda() const { return Lambda_; }
  double sigma() const { return sigma_; }
  const std::string& description() const { return description_; }

  /// Throws AdmissibilityError unless lambda <= eig(A(y)) <= Lambda at all samples.
  void require_bounds(double lambda, double Lambda) const;

  std::vector<SymMatrix> sample(const TorusGrid& grid) const;
  /// Entry (i,j) sampled on the grid.
  GridField entry(const TorusGrid& grid, int i, int j) const;

 private:
  int dim_ = 0;
  Evaluator eval_;
  std::string description_;
  double lambda_ = 0.0, Lambda_ = 0.0, sigma_ = 0.0;
};

/// Eigenvalues (ascending) of the leading dim x dim block.
std::array<double, 2> eigenvalues(const SymMatrix& m, int dim);

}  // namespace homog
