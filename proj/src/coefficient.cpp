#include "homog/coefficient.hpp"

#include <algorithm>
#include <cmath>

namespace homog {

std::array<double, 2> eigenvalues(const SymMatrix& m, int dim) {
  if (dim == 1) return {m(0, 0), m(0, 0)};
  double tr = m(0, 0) + m(1, 1);
  double d = std::sqrt(0.25 * (m(0, 0) - m(1, 1)) * (m(0, 0) - m(1, 1)) + m(0, 1) * m(0, 1));
  return {0.5 * tr - d, 0.5 * tr + d};
}

CoefficientField::CoefficientField(int dim, Evaluator eval, std::string description)
    : dim_(dim), eval_(std::move(eval)), description_(std::move(description)) {
  if (dim_ != 1 && dim_ != 2) throw ConfigError("coefficient dimension must be 1 or 2");
  const int n = dim_ == 1 ? 512 : 64;
  TorusGrid g(dim_, n);
  lambda_ = INFINITY;
  Lambda_ = 0.0;
  sigma_ = 0.0;
  const double h = g.spacing();
  for (std::size_t p = 0; p < g.size(); ++p) {
    Point y = g.node(p);
    SymMatrix a = eval_(y);
    if (!a.allFinite()) throw AdmissibilityError(description_ + ": non-finite coefficient");
    if (dim_ == 2 && std::abs(a(0, 1) - a(1, 0)) > 1e-14 * (1.0 + a.norm()))
      throw AdmissibilityError(description_ + ": coefficient is not symmetric");
    auto ev = eigenvalues(a, dim_);
    lambda_ = std::min(lambda_, ev[0]);
    Lambda_ = std::max(Lambda_, ev[1]);
    for (int k = 0; k < dim_; ++k) {
      Point shifted = y;
      shifted[k] += 1.0;
      if ((eval_(shifted) - a).norm() > 1e-10 * (1.0 + a.norm()))
        throw AdmissibilityError(description_ + ": coefficient is not 1-periodic");
      Point next = y;
      next[k] += h;
      sigma_ = std::max(sigma_, (eval_(next) - a).norm() / h);
    }
  }
  if (!(lambda_ > 0.0)) throw AdmissibilityError(description_ + ": coefficient is not uniformly elliptic");
}

CoefficientField CoefficientField::scalar(const ScalarFunction& a) {
  return CoefficientField(
      1,
      [a](const Point& y) {
        SymMatrix m = SymMatrix::Zero();
        m(0, 0) = a(y);
        return m;
      },
      a.text);
}

CoefficientField CoefficientField::entries(const ScalarFunction& a11, const ScalarFunction& a22,
                                           const ScalarFunction* a12) {
  ScalarFunction off = a12 ? *a12 : constant_function(0.0);
  std::string desc = "[" + a11.text + ", " + off.text + "; " + off.text + ", " + a22.text + "]";
  return CoefficientField(
      2,
      [a11, a22, off](const Point& y) {
        SymMatrix m;
        m(0, 0) = a11(y);
        m(1, 1) = a22(y);
        m(0, 1) = m(1, 0) = off(y);
        return m;
      },
      desc);
}

void CoefficientField::require_bounds(double lambda, double Lambda) const {
  if (lambda_ < lambda - 1e-12 || Lambda_ > Lambda + 1e-12)
    throw AdmissibilityError(description_ + ": eigenvalues outside the declared ellipticity bounds");
}

std::vector<SymMatrix> CoefficientField::sample(const TorusGrid& grid) const {
  if (grid.dim != dim_) throw Error("coefficient and grid dimensions differ");
  std::vector<SymMatrix> out(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) out[p] = eval_(grid.node(p));
  return out;
}

GridField CoefficientField::entry(const TorusGrid& grid, int i, int j) const {
  GridField f(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) f[p] = eval_(grid.node(p))(i, j);
  return f;
}

}  // namespace homog
