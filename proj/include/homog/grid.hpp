#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "homog/types.hpp"

namespace homog {

/// Uniform periodic grid on the unit torus [0,1)^dim with n nodes per axis.
struct TorusGrid {
  int dim = 1;
  int n = 0;

  TorusGrid() = default;
  TorusGrid(int dim, int n);

  double spacing() const { return 1.0 / n; }
  std::size_t size() const { return dim == 1 ? std::size_t(n) : std::size_t(n) * n; }
  std::size_t index(int i0, int i1 = 0) const;
  std::array<int, 2> coords(std::size_t p) const;
  Point node(std::size_t p) const;
  std::size_t neighbor(std::size_t p, int d0, int d1 = 0) const;

  bool operator==(const TorusGrid&) const = default;
};

/// Uniform node-centred grid on a box, boundary nodes included.
struct BoxGrid {
  int dim = 1;
  Point lower{0.0, 0.0};
  Point upper{1.0, 1.0};
  std::array<int, 2> intervals{0, 0};

  BoxGrid() = default;
  BoxGrid(int dim, Point lower, Point upper, std::array<int, 2> intervals);
  /// Smallest uniform grid whose spacing does not exceed `max_spacing` on any axis.
  static BoxGrid with_max_spacing(int dim, Point lower, Point upper, double max_spacing);

  double spacing(int axis) const { return (upper[axis] - lower[axis]) / intervals[axis]; }
  double max_spacing() const;
  int nodes(int axis) const { return intervals[axis] + 1; }
  std::size_t size() const;
  std::size_t index(int i0, int i1 = 0) const;
  std::array<int, 2> coords(std::size_t p) const;
  Point node(std::size_t p) const;
  bool on_boundary(std::size_t p) const;
  /// Distance in nodes to the nearest boundary face.
  int depth(std::size_t p) const;
  Point center() const;
  double circumradius() const;
  /// Same box with every axis refined (factor > 1) or coarsened (factor < 1).
  BoxGrid rescaled(double factor) const;

  bool operator==(const BoxGrid&) const = default;
};

using AnyGrid = std::variant<TorusGrid, BoxGrid>;

/// Node values on a grid; `components` values per node, node-major.
class GridField {
 public:
  GridField() = default;
  explicit GridField(TorusGrid grid, int components = 1, double fill = 0.0);
  explicit GridField(BoxGrid grid, int components = 1, double fill = 0.0);

  const AnyGrid& grid() const { return grid_; }
  bool periodic() const { return std::holds_alternative<TorusGrid>(grid_); }
  const TorusGrid& torus() const { return std::get<TorusGrid>(grid_); }
  const BoxGrid& box() const { return std::get<BoxGrid>(grid_); }
  int dim() const;
  int components() const { return components_; }
  std::size_t nodes() const { return components_ == 0 ? 0 : values_.size() / components_; }

  double& operator()(std::size_t node, int c = 0) { return values_[node * components_ + c]; }
  double operator()(std::size_t node, int c = 0) const { return values_[node * components_ + c]; }
  double& operator[](std::size_t node) { return values_[node * components_]; }
  double operator[](std::size_t node) const { return values_[node * components_]; }

  std::vector<double>& values() { return values_; }
  std::span<const double> values() const { return values_; }
  Point node_point(std::size_t node) const;

  GridField& operator+=(const GridField& other);
  GridField& operator*=(double s);

 private:
  AnyGrid grid_;
  int components_ = 0;
  std::vector<double> values_;
};

GridField operator+(GridField a, const GridField& b);
GridField operator-(GridField a, const GridField& b);
GridField operator*(double s, GridField a);

/// Centred second difference D_{ij}. Mixed derivatives use the 4-point cross
/// stencil. On a box only interior nodes are evaluated; boundary nodes are 0.
GridField second_difference(const GridField& field, int i, int j);

/// Centred first difference along `axis`; second-order one-sided at box faces.
GridField first_difference(const GridField& field, int axis);

double sup_norm(const GridField& field);
double sup_norm(std::span<const double> values);
double sup_diff(const GridField& a, const GridField& b);
/// max - min over all nodes of component `c`.
double oscillation(const GridField& field, int c = 0);

}  // namespace homog
