#include "homog/stencil.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SparseLU>

namespace homog {

double LocalStencil::worst_off_center() const {
  double worst = 0.0;
  for (int d0 = -1; d0 <= 1; ++d0)
    for (int d1 = -1; d1 <= 1; ++d1)
      if (d0 != 0 || d1 != 0) worst = std::min(worst, at(d0, d1));
  return worst;
}

LocalStencil signed_stencil(const SymMatrix& a, int dim, double h0, double h1, int mixed_sign) {
  LocalStencil s;
  double c0 = a(0, 0) / (h0 * h0);
  s.at(1, 0) += c0;
  s.at(-1, 0) += c0;
  s.at(0, 0) -= 2.0 * c0;
  if (dim == 1) return s;
  double c1 = a(1, 1) / (h1 * h1);
  s.at(0, 1) += c1;
  s.at(0, -1) += c1;
  s.at(0, 0) -= 2.0 * c1;
  // 2 a_12 D_12 with D_12 from the chosen diagonal leg.
  double m = a(0, 1) / (h0 * h1);
  if (mixed_sign >= 0) {
    s.at(1, 1) += m;
    s.at(-1, -1) += m;
    s.at(0, 0) += 2.0 * m;
    s.at(1, 0) -= m;
    s.at(-1, 0) -= m;
    s.at(0, 1) -= m;
    s.at(0, -1) -= m;
  } else {
    s.at(1, -1) -= m;
    s.at(-1, 1) -= m;
    s.at(0, 0) -= 2.0 * m;
    s.at(1, 0) += m;
    s.at(-1, 0) += m;
    s.at(0, 1) += m;
    s.at(0, -1) += m;
  }
  return s;
}

LocalStencil monotone_stencil(const SymMatrix& a, int dim, double h0, double h1) {
  return signed_stencil(a, dim, h0, h1, a(0, 1) >= 0.0 ? 1 : -1);
}

LocalStencil cross_stencil(const SymMatrix& a, int dim, double h0, double h1) {
  LocalStencil s;
  double c0 = a(0, 0) / (h0 * h0);
  s.at(1, 0) += c0;
  s.at(-1, 0) += c0;
  s.at(0, 0) -= 2.0 * c0;
  if (dim == 1) return s;
  double c1 = a(1, 1) / (h1 * h1);
  s.at(0, 1) += c1;
  s.at(0, -1) += c1;
  s.at(0, 0) -= 2.0 * c1;
  double m = 2.0 * a(0, 1) / (4.0 * h0 * h1);
  s.at(1, 1) += m;
  s.at(-1, -1) += m;
  s.at(1, -1) -= m;
  s.at(-1, 1) -= m;
  return s;
}

void audit_monotone(const LocalStencil& s, const char* where) {
  double scale = std::abs(s.center());
  if (s.worst_off_center() < -1e-12 * scale)
    throw MonotonicityError(std::string(where) +
                            ": negative off-diagonal stencil weight (need a_ii h_j / h_i >= |a_12|)");
}

SymMatrix discrete_hessian(const std::function<double(int, int)>& value, int dim, double h0,
                           double h1) {
  SymMatrix m = SymMatrix::Zero();
  double c = value(0, 0);
  m(0, 0) = (value(1, 0) - 2.0 * c + value(-1, 0)) / (h0 * h0);
  if (dim == 2) {
    m(1, 1) = (value(0, 1) - 2.0 * c + value(0, -1)) / (h1 * h1);
    m(0, 1) = (value(1, 1) - value(1, -1) - value(-1, 1) + value(-1, -1)) / (4.0 * h0 * h1);
    m(1, 0) = m(0, 1);
  }
  return m;
}

SymMatrix signed_hessian(const std::function<double(int, int)>& value, int dim, double h0, double h1,
                         int mixed_sign) {
  SymMatrix m = SymMatrix::Zero();
  double c = value(0, 0);
  m(0, 0) = ((value(1, 0) - c) + (value(-1, 0) - c)) / (h0 * h0);
  if (dim == 2) {
    m(1, 1) = ((value(0, 1) - c) + (value(0, -1) - c)) / (h1 * h1);
    double axis = (value(1, 0) - c) + (value(-1, 0) - c) + (value(0, 1) - c) + (value(0, -1) - c);
    if (mixed_sign >= 0)
      m(0, 1) = ((value(1, 1) - c) + (value(-1, -1) - c) - axis) / (2.0 * h0 * h1);
    else
      m(0, 1) = -((value(1, -1) - c) + (value(-1, 1) - c) - axis) / (2.0 * h0 * h1);
    m(1, 0) = m(0, 1);
  }
  return m;
}

SymMatrix field_hessian(const GridField& u, std::size_t p, int mixed_sign) {
  if (u.periodic()) {
    const auto& g = u.torus();
    double h = g.spacing();
    return signed_hessian([&](int d0, int d1) { return u[g.neighbor(p, d0, d1)]; }, g.dim, h, h,
                          mixed_sign);
  }
  const auto& g = u.box();
  auto c = g.coords(p);
  return signed_hessian([&](int d0, int d1) { return u[g.index(c[0] + d0, c[1] + d1)]; }, g.dim,
                        g.spacing(0), g.dim == 2 ? g.spacing(1) : 1.0, mixed_sign);
}

SparseMatrix torus_assemble(const TorusGrid& grid,
                            const std::function<LocalStencil(std::size_t)>& stencil) {
  const std::size_t n = grid.size();
  Triplets t;
  t.reserve(n * (grid.dim == 1 ? 3 : 9));
  for (std::size_t p = 0; p < n; ++p) {
    LocalStencil s = stencil(p);
    for (int d0 = -1; d0 <= 1; ++d0)
      for (int d1 = (grid.dim == 1 ? 0 : -1); d1 <= (grid.dim == 1 ? 0 : 1); ++d1) {
        double w = s.at(d0, d1);
        if (w != 0.0) t.emplace_back(int(p), int(grid.neighbor(p, d0, d1)), w);
      }
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix box_assemble(const BoxGrid& grid,
                          const std::function<LocalStencil(std::size_t)>& stencil) {
  const std::size_t n = grid.size();
  Triplets t;
  t.reserve(n * (grid.dim == 1 ? 3 : 9));
  for (std::size_t p = 0; p < n; ++p) {
    if (grid.on_boundary(p)) {
      t.emplace_back(int(p), int(p), 1.0);
      continue;
    }
    LocalStencil s = stencil(p);
    auto c = grid.coords(p);
    for (int d0 = -1; d0 <= 1; ++d0)
      for (int d1 = (grid.dim == 1 ? 0 : -1); d1 <= (grid.dim == 1 ? 0 : 1); ++d1) {
        double w = s.at(d0, d1);
        if (w != 0.0) t.emplace_back(int(p), int(grid.index(c[0] + d0, c[1] + d1)), w);
      }
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix torus_operator(const TorusGrid& grid, const NodeCoefficient& a) {
  double h = grid.spacing();
  return torus_assemble(grid, [&](std::size_t p) {
    LocalStencil s = monotone_stencil(a(p), grid.dim, h, h);
    audit_monotone(s, "cell operator");
    return s;
  });
}

SparseMatrix box_operator(const BoxGrid& grid, const NodeCoefficient& a) {
  double h0 = grid.spacing(0), h1 = grid.dim == 2 ? grid.spacing(1) : 1.0;
  return box_assemble(grid, [&](std::size_t p) {
    LocalStencil s = monotone_stencil(a(p), grid.dim, h0, h1);
    audit_monotone(s, "box operator");
    return s;
  });
}

Eigen::VectorXd sparse_solve(const SparseMatrix& a, const Eigen::VectorXd& b, const char* what) {
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success)
    throw SolverError(std::string(what) + ": factorization failed (" + lu.lastErrorMessage() + ")");
  Eigen::VectorXd x = lu.solve(b);
  Eigen::VectorXd r = b - a * x;
  x += lu.solve(r);
  if (!x.allFinite()) throw SolverError(std::string(what) + ": non-finite solution");
  return x;
}

}  // namespace homog
