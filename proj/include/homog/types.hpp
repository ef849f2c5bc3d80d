#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace homog {

/// Point in R^dim; only the first `dim` entries are meaningful.
using Point = std::array<double, 2>;

/// Symmetric 2x2 matrix. One-dimensional problems use the (0,0) entry only.
using SymMatrix = Eigen::Matrix2d;

inline SymMatrix zero_matrix() { return SymMatrix::Zero(); }

/// Symmetric direction (e_k e_l^T + e_l e_k^T) / 2.
inline SymMatrix unit_matrix(int k, int l) {
  SymMatrix e = SymMatrix::Zero();
  e(k, l) += 0.5;
  e(l, k) += 0.5;
  return e;
}

inline double contract(const SymMatrix& a, const SymMatrix& m, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) s += a(i, j) * m(i, j);
  return s;
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: malformed config, invalid parameters, unknown keys.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Requested grid too coarse for the oscillation scale.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Discrete operator fails the M-matrix sign condition.
class MonotonicityError : public Error {
 public:
  using Error::Error;
};

/// Iterative or direct solve failed to meet its tolerance.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Coefficient or operator fails its structural checks.
class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace homog
