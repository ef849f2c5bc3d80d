#pragma once

#include <map>
#include <vector>

#include "homog/grid.hpp"

namespace homog {

/// Finite-difference weights for the k-th derivative at `x0` from samples at
/// `nodes` (Fornberg's recursion).
std::vector<double> fd_weights(double x0, const std::vector<double>& nodes, int k);

struct DerivativeOptions {
  /// Relative round-off level of the input field, used to pick the stride.
  double roundoff = 1e-15;
  /// Noise test: stride s and 2s results must agree within
  /// noise_tol * sup + noise_floor.
  double noise_tol = 0.1;
  double noise_floor = 1e-8;
  bool check_noise = true;
  /// Formal accuracy order of the stencils (even, >= 2).
  int accuracy = 2;
};

/// Per-axis derivative counts (a0, a1) -> D_{x_0}^{a0} D_{x_1}^{a1} field.
using DerivativeKey = std::array<int, 2>;

/// All mixed partial derivatives of a box field up to a total order.
class DerivativeSet {
 public:
  DerivativeSet() = default;
  DerivativeSet(GridField base, int max_order) : base_(std::move(base)), max_order_(max_order) {}

  int max_order() const { return max_order_; }
  const GridField& base() const { return base_; }
  /// Derivative for the given per-axis counts; order 0 returns the field.
  const GridField& get(DerivativeKey key) const;
  /// Derivative D_{x_{t_1}} ... D_{x_{t_k}} for an index tuple.
  const GridField& get_tuple(const std::vector<int>& tuple) const;
  bool has(DerivativeKey key) const;

  void insert(DerivativeKey key, GridField f, int stride, double noise);
  int stride(DerivativeKey key) const;
  /// Sup difference between stride s and 2s extractions (0 if not tested).
  double noise(DerivativeKey key) const;

 private:
  GridField base_;
  int max_order_ = 0;
  std::map<DerivativeKey, GridField> fields_;
  std::map<DerivativeKey, int> strides_;
  std::map<DerivativeKey, double> noise_;
};

/// One mixed derivative on a sub-grid of the given stride, interpolated back.
GridField mixed_derivative(const GridField& field, DerivativeKey key, int stride, int accuracy = 2);

/// Stride chosen so that round-off amplification stays below truncation error.
int derivative_stride(const BoxGrid& grid, int order, double roundoff, int accuracy = 2);

/// Centred stencils with one-sided closures at the faces, one derivative order
/// at a time. Throws ResolutionError when the stride-s and stride-2s results
/// differ by more than the noise tolerance.
DerivativeSet high_order_derivatives(const GridField& field, int order,
                                     const DerivativeOptions& options = {});

}  // namespace homog
