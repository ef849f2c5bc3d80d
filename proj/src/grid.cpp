#include "homog/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace homog {

namespace {

int wrap(int i, int n) {
  int r = i % n;
  return r < 0 ? r + n : r;
}

void check_dim(int dim) {
  if (dim != 1 && dim != 2) throw ConfigError("dimension must be 1 or 2");
}

}  // namespace

TorusGrid::TorusGrid(int dim_, int n_) : dim(dim_), n(n_) {
  check_dim(dim);
  if (n < 4) throw ConfigError("torus grid needs at least 4 nodes per axis");
}

std::size_t TorusGrid::index(int i0, int i1) const {
  if (dim == 1) return std::size_t(wrap(i0, n));
  return std::size_t(wrap(i0, n)) + std::size_t(n) * std::size_t(wrap(i1, n));
}

std::array<int, 2> TorusGrid::coords(std::size_t p) const {
  if (dim == 1) return {int(p), 0};
  return {int(p % n), int(p / n)};
}

Point TorusGrid::node(std::size_t p) const {
  auto c = coords(p);
  return {c[0] * spacing(), dim == 2 ? c[1] * spacing() : 0.0};
}

std::size_t TorusGrid::neighbor(std::size_t p, int d0, int d1) const {
  auto c = coords(p);
  return index(c[0] + d0, c[1] + d1);
}

BoxGrid::BoxGrid(int dim_, Point lower_, Point upper_, std::array<int, 2> intervals_)
    : dim(dim_), lower(lower_), upper(upper_), intervals(intervals_) {
  check_dim(dim);
  if (dim == 1) {
    lower[1] = 0.0;
    upper[1] = 0.0;
    intervals[1] = 0;
  }
  for (int a = 0; a < dim; ++a) {
    if (!(upper[a] > lower[a])) throw ConfigError("box must have positive extent");
    if (intervals[a] < 2) throw ConfigError("box grid needs at least 2 intervals per axis");
  }
}

BoxGrid BoxGrid::with_max_spacing(int dim, Point lower, Point upper, double max_spacing) {
  if (!(max_spacing > 0.0)) throw ConfigError("grid spacing must be positive");
  std::array<int, 2> iv{0, 0};
  for (int a = 0; a < dim; ++a) {
    double len = upper[a] - lower[a];
    iv[a] = std::max(2, int(std::ceil(len / max_spacing * (1.0 - 1e-12))));
  }
  return BoxGrid(dim, lower, upper, iv);
}

double BoxGrid::max_spacing() const {
  double h = spacing(0);
  if (dim == 2) h = std::max(h, spacing(1));
  return h;
}

std::size_t BoxGrid::size() const {
  return dim == 1 ? std::size_t(nodes(0)) : std::size_t(nodes(0)) * nodes(1);
}

std::size_t BoxGrid::index(int i0, int i1) const {
  return std::size_t(i0) + std::size_t(nodes(0)) * std::size_t(i1);
}

std::array<int, 2> BoxGrid::coords(std::size_t p) const {
  if (dim == 1) return {int(p), 0};
  return {int(p % nodes(0)), int(p / nodes(0))};
}

Point BoxGrid::node(std::size_t p) const {
  auto c = coords(p);
  Point x{lower[0] + c[0] * spacing(0), 0.0};
  if (c[0] == intervals[0]) x[0] = upper[0];
  if (dim == 2) {
    x[1] = lower[1] + c[1] * spacing(1);
    if (c[1] == intervals[1]) x[1] = upper[1];
  }
  return x;
}

bool BoxGrid::on_boundary(std::size_t p) const { return depth(p) == 0; }

int BoxGrid::depth(std::size_t p) const {
  auto c = coords(p);
  int d = std::min(c[0], intervals[0] - c[0]);
  if (dim == 2) d = std::min({d, c[1], intervals[1] - c[1]});
  return d;
}

Point BoxGrid::center() const {
  return {0.5 * (lower[0] + upper[0]), dim == 2 ? 0.5 * (lower[1] + upper[1]) : 0.0};
}

double BoxGrid::circumradius() const {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += 0.25 * (upper[a] - lower[a]) * (upper[a] - lower[a]);
  return std::sqrt(s);
}

BoxGrid BoxGrid::rescaled(double factor) const {
  std::array<int, 2> iv = intervals;
  for (int a = 0; a < dim; ++a) iv[a] = std::max(2, int(std::lround(intervals[a] * factor)));
  return BoxGrid(dim, lower, upper, iv);
}

GridField::GridField(TorusGrid grid, int components, double fill)
    : grid_(grid), components_(components), values_(grid.size() * components, fill) {}

GridField::GridField(BoxGrid grid, int components, double fill)
    : grid_(grid), components_(components), values_(grid.size() * components, fill) {}

int GridField::dim() const {
  return std::visit([](const auto& g) { return g.dim; }, grid_);
}

Point GridField::node_point(std::size_t node) const {
  return std::visit([node](const auto& g) { return g.node(node); }, grid_);
}

GridField& GridField::operator+=(const GridField& other) {
  if (other.values_.size() != values_.size()) throw Error("field size mismatch");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

GridField& GridField::operator*=(double s) {
  for (auto& v : values_) v *= s;
  return *this;
}

GridField operator+(GridField a, const GridField& b) { return a += b; }
GridField operator-(GridField a, const GridField& b) { return a += (-1.0) * b; }
GridField operator*(double s, GridField a) { return a *= s; }

GridField second_difference(const GridField& field, int i, int j) {
  if (field.components() != 1) throw Error("second_difference expects a scalar field");
  if (i < 0 || j < 0 || i >= field.dim() || j >= field.dim()) throw Error("axis out of range");
  GridField out = field;
  if (field.periodic()) {
    const auto& g = field.torus();
    double h = g.spacing();
    for (std::size_t p = 0; p < g.size(); ++p) {
      if (i == j) {
        int d0 = i == 0 ? 1 : 0, d1 = i == 1 ? 1 : 0;
        out[p] = (field[g.neighbor(p, d0, d1)] - 2.0 * field[p] + field[g.neighbor(p, -d0, -d1)]) / (h * h);
      } else {
        out[p] = (field[g.neighbor(p, 1, 1)] - field[g.neighbor(p, 1, -1)] -
                  field[g.neighbor(p, -1, 1)] + field[g.neighbor(p, -1, -1)]) /
                 (4.0 * h * h);
      }
    }
    return out;
  }
  const auto& g = field.box();
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (g.on_boundary(p)) {
      out[p] = 0.0;
      continue;
    }
    auto c = g.coords(p);
    if (i == j) {
      double h = g.spacing(i);
      int d0 = i == 0 ? 1 : 0, d1 = i == 1 ? 1 : 0;
      out[p] = (field[g.index(c[0] + d0, c[1] + d1)] - 2.0 * field[p] +
                field[g.index(c[0] - d0, c[1] - d1)]) /
               (h * h);
    } else {
      double h0 = g.spacing(0), h1 = g.spacing(1);
      out[p] = (field[g.index(c[0] + 1, c[1] + 1)] - field[g.index(c[0] + 1, c[1] - 1)] -
                field[g.index(c[0] - 1, c[1] + 1)] + field[g.index(c[0] - 1, c[1] - 1)]) /
               (4.0 * h0 * h1);
    }
  }
  return out;
}

GridField first_difference(const GridField& field, int axis) {
  if (field.components() != 1) throw Error("first_difference expects a scalar field");
  if (axis < 0 || axis >= field.dim()) throw Error("axis out of range");
  GridField out = field;
  int d0 = axis == 0 ? 1 : 0, d1 = axis == 1 ? 1 : 0;
  if (field.periodic()) {
    const auto& g = field.torus();
    double h = g.spacing();
    for (std::size_t p = 0; p < g.size(); ++p)
      out[p] = (field[g.neighbor(p, d0, d1)] - field[g.neighbor(p, -d0, -d1)]) / (2.0 * h);
    return out;
  }
  const auto& g = field.box();
  double h = g.spacing(axis);
  int last = g.intervals[axis];
  for (std::size_t p = 0; p < g.size(); ++p) {
    auto c = g.coords(p);
    auto at = [&](int s) { return field[g.index(c[0] + s * d0, c[1] + s * d1)]; };
    if (c[axis] == 0)
      out[p] = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
    else if (c[axis] == last)
      out[p] = (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * h);
    else
      out[p] = (at(1) - at(-1)) / (2.0 * h);
  }
  return out;
}

double sup_norm(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
    m = std::max(m, std::abs(v));
  }
  return m;
}

double sup_norm(const GridField& field) { return sup_norm(field.values()); }

double sup_diff(const GridField& a, const GridField& b) {
  auto va = a.values();
  auto vb = b.values();
  if (va.size() != vb.size()) throw Error("field size mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < va.size(); ++k) m = std::max(m, std::abs(va[k] - vb[k]));
  return m;
}

double oscillation(const GridField& field, int c) {
  if (field.nodes() == 0) return 0.0;
  double lo = field(0, c), hi = field(0, c);
  for (std::size_t p = 1; p < field.nodes(); ++p) {
    lo = std::min(lo, field(p, c));
    hi = std::max(hi, field(p, c));
  }
  return hi - lo;
}

}  // namespace homog
