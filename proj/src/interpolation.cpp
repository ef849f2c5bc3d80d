#include "homog/interpolation.hpp"

#include <algorithm>
#include <cmath>

namespace homog {

std::array<double, 4> cubic_weights(double t) {
  return {-t * (t - 1.0) * (t - 2.0) / 6.0, (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
          -(t + 1.0) * t * (t - 2.0) / 2.0, (t + 1.0) * t * (t - 1.0) / 6.0};
}

namespace {

struct AxisStencil {
  int first;  // index of the first of four nodes
  std::array<double, 4> w;
};

AxisStencil periodic_axis(double y, int n) {
  double s = (y - std::floor(y)) * n;
  int base = int(std::floor(s));
  double t = s - base;
  if (base >= n) {
    base -= n;
  }
  return {base - 1, cubic_weights(t)};
}

// Four nodes inside [0, intervals], offset chosen so the point lies in the
// middle cell when possible.
AxisStencil box_axis(double x, double lower, double h, int intervals) {
  double s = (x - lower) / h;
  int base = std::clamp(int(std::floor(s)), 0, intervals - 1);
  int first = std::clamp(base - 1, 0, intervals - 3);
  double t = s - (first + 1);
  return {first, cubic_weights(t)};
}

}  // namespace

double interpolate_periodic(const GridField& field, const Point& y, int component) {
  const auto& g = field.torus();
  auto s0 = periodic_axis(y[0], g.n);
  if (g.dim == 1) {
    double v = 0.0;
    for (int a = 0; a < 4; ++a) v += s0.w[a] * field(g.index(s0.first + a), component);
    return v;
  }
  auto s1 = periodic_axis(y[1], g.n);
  double v = 0.0;
  for (int b = 0; b < 4; ++b) {
    double row = 0.0;
    for (int a = 0; a < 4; ++a) row += s0.w[a] * field(g.index(s0.first + a, s1.first + b), component);
    v += s1.w[b] * row;
  }
  return v;
}

double interpolate_box(const GridField& field, const Point& x, int component) {
  const auto& g = field.box();
  auto s0 = box_axis(x[0], g.lower[0], g.spacing(0), g.intervals[0]);
  if (g.dim == 1) {
    double v = 0.0;
    for (int a = 0; a < 4; ++a) v += s0.w[a] * field(g.index(s0.first + a), component);
    return v;
  }
  auto s1 = box_axis(x[1], g.lower[1], g.spacing(1), g.intervals[1]);
  double v = 0.0;
  for (int b = 0; b < 4; ++b) {
    double row = 0.0;
    for (int a = 0; a < 4; ++a) row += s0.w[a] * field(g.index(s0.first + a, s1.first + b), component);
    v += s1.w[b] * row;
  }
  return v;
}

ProductField::ProductField(TorusGrid cell, BoxGrid outer, double fill)
    : cell_(cell), outer_(outer), values_(cell.size() * outer.size(), fill) {}

GridField ProductField::slice(std::size_t outer_node) const {
  GridField f(cell_);
  for (std::size_t p = 0; p < cell_.size(); ++p) f[p] = at(p, outer_node);
  return f;
}

void ProductField::set_slice(std::size_t outer_node, const GridField& cell_field) {
  for (std::size_t p = 0; p < cell_.size(); ++p) at(p, outer_node) = cell_field[p];
}

GridField ProductField::column(std::size_t cell_node) const {
  GridField f(outer_);
  for (std::size_t q = 0; q < outer_.size(); ++q) f[q] = at(cell_node, q);
  return f;
}

void ProductField::set_column(std::size_t cell_node, const GridField& outer_field) {
  for (std::size_t q = 0; q < outer_.size(); ++q) at(cell_node, q) = outer_field[q];
}

double ProductField::evaluate(const Point& y, const Point& x) const {
  auto sy0 = periodic_axis(y[0], cell_.n);
  auto sx0 = box_axis(x[0], outer_.lower[0], outer_.spacing(0), outer_.intervals[0]);
  auto cell_value = [&](std::size_t q) {
    if (cell_.dim == 1) {
      double v = 0.0;
      for (int a = 0; a < 4; ++a) v += sy0.w[a] * at(cell_.index(sy0.first + a), q);
      return v;
    }
    auto sy1 = periodic_axis(y[1], cell_.n);
    double v = 0.0;
    for (int b = 0; b < 4; ++b) {
      double row = 0.0;
      for (int a = 0; a < 4; ++a) row += sy0.w[a] * at(cell_.index(sy0.first + a, sy1.first + b), q);
      v += sy1.w[b] * row;
    }
    return v;
  };
  if (outer_.dim == 1) {
    double v = 0.0;
    for (int a = 0; a < 4; ++a) v += sx0.w[a] * cell_value(outer_.index(sx0.first + a));
    return v;
  }
  auto sx1 = box_axis(x[1], outer_.lower[1], outer_.spacing(1), outer_.intervals[1]);
  double v = 0.0;
  for (int b = 0; b < 4; ++b) {
    double row = 0.0;
    for (int a = 0; a < 4; ++a) row += sx0.w[a] * cell_value(outer_.index(sx0.first + a, sx1.first + b));
    v += sx1.w[b] * row;
  }
  return v;
}

}  // namespace homog
