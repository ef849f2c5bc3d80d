#pragma once

#include <vector>

#include "homog/grid.hpp"

namespace homog {

/// Four-point Lagrange weights for a fractional offset t in [0,1) between
/// nodes 0 and 1 of the stencil {-1, 0, 1, 2}.
std::array<double, 4> cubic_weights(double t);

/// Periodic cubic interpolation of a torus field; y is reduced mod 1.
double interpolate_periodic(const GridField& field, const Point& y, int component = 0);

/// Cubic interpolation of a box field, stencil shifted inward at the faces.
double interpolate_box(const GridField& field, const Point& x, int component = 0);

/// Samples w(y, x) on cell-grid x effective-grid nodes.
class ProductField {
 public:
  ProductField() = default;
  ProductField(TorusGrid cell, BoxGrid outer, double fill = 0.0);

  const TorusGrid& cell() const { return cell_; }
  const BoxGrid& outer() const { return outer_; }

  double& at(std::size_t cell_node, std::size_t outer_node) {
    return values_[outer_node * cell_.size() + cell_node];
  }
  double at(std::size_t cell_node, std::size_t outer_node) const {
    return values_[outer_node * cell_.size() + cell_node];
  }
  /// Cell field at a fixed outer node.
  GridField slice(std::size_t outer_node) const;
  void set_slice(std::size_t outer_node, const GridField& cell_field);
  /// Outer-grid field at a fixed cell node.
  GridField column(std::size_t cell_node) const;
  void set_column(std::size_t cell_node, const GridField& outer_field);

  /// Periodic cubic in y, cubic in x.
  double evaluate(const Point& y, const Point& x) const;

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

 private:
  TorusGrid cell_;
  BoxGrid outer_;
  std::vector<double> values_;
};

}  // namespace homog
