#include "homog/derivatives.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "homog/interpolation.hpp"

namespace homog {

std::vector<double> fd_weights(double x0, const std::vector<double>& x, int k) {
  const int n = int(x.size());
  if (n <= k) throw Error("finite-difference stencil has too few nodes for the derivative order");
  std::vector<std::vector<double>> c(n, std::vector<double>(k + 1, 0.0));
  double c1 = 1.0, c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    int mn = std::min(i, k);
    double c2 = 1.0, c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int m = mn; m >= 1; --m) c[i][m] = c1 * (m * c[i - 1][m - 1] - c5 * c[i - 1][m]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int m = mn; m >= 1; --m) c[j][m] = (c4 * c[j][m] - m * c[j][m - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][k];
  return w;
}

const GridField& DerivativeSet::get(DerivativeKey key) const {
  if (key[0] == 0 && key[1] == 0) return base_;
  auto it = fields_.find(key);
  if (it == fields_.end())
    throw Error("derivative (" + std::to_string(key[0]) + "," + std::to_string(key[1]) +
                ") was not extracted");
  return it->second;
}

const GridField& DerivativeSet::get_tuple(const std::vector<int>& tuple) const {
  DerivativeKey key{0, 0};
  for (int i : tuple) ++key[i];
  return get(key);
}

bool DerivativeSet::has(DerivativeKey key) const {
  return (key[0] == 0 && key[1] == 0) || fields_.count(key) > 0;
}

void DerivativeSet::insert(DerivativeKey key, GridField f, int stride, double noise) {
  fields_[key] = std::move(f);
  strides_[key] = stride;
  noise_[key] = noise;
}

int DerivativeSet::stride(DerivativeKey key) const {
  auto it = strides_.find(key);
  return it == strides_.end() ? 1 : it->second;
}

double DerivativeSet::noise(DerivativeKey key) const {
  auto it = noise_.find(key);
  return it == noise_.end() ? 0.0 : it->second;
}

namespace {

bool stride_fits(const BoxGrid& g, int order, int s, int accuracy) {
  for (int a = 0; a < g.dim; ++a)
    if (g.intervals[a] % s != 0 || g.intervals[a] / s < order + accuracy + 1) return false;
  return true;
}

BoxGrid coarse_grid(const BoxGrid& g, int s) {
  std::array<int, 2> iv{g.intervals[0] / s, g.dim == 2 ? g.intervals[1] / s : 0};
  return BoxGrid(g.dim, g.lower, g.upper, iv);
}

// Derivative of order k along one axis, accurate to the given order up to the faces.
GridField axis_derivative(const GridField& f, int axis, int k, int accuracy) {
  if (k == 0) return f;
  const auto& g = f.box();
  const int n = g.intervals[axis];
  const double scale = std::pow(g.spacing(axis), -k);
  const int half = ((k % 2 == 0) ? k + accuracy - 2 : k + accuracy - 1) / 2;
  const int width = k + accuracy;
  // Weights depend only on the position of the node inside its window.
  std::vector<std::vector<double>> table(n + 1);
  std::vector<int> start(n + 1);
  for (int i = 0; i <= n; ++i) {
    int lo, count;
    if (i - half >= 0 && i + half <= n) {
      lo = i - half;
      count = 2 * half + 1;
    } else {
      lo = std::clamp(i - half, 0, n + 1 - width);
      count = width;
    }
    std::vector<double> nodes(count);
    for (int j = 0; j < count; ++j) nodes[j] = lo + j;
    table[i] = fd_weights(i, nodes, k);
    start[i] = lo;
  }
  GridField out(g);
  for (std::size_t p = 0; p < g.size(); ++p) {
    auto c = g.coords(p);
    int i = c[axis];
    const auto& w = table[i];
    double v = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      auto cc = c;
      cc[axis] = start[i] + int(j);
      v += w[j] * f[g.index(cc[0], cc[1])];
    }
    out[p] = v * scale;
  }
  return out;
}

}  // namespace

int derivative_stride(const BoxGrid& grid, int order, double roundoff, int accuracy) {
  if (order <= 1) return 1;
  double extent = grid.upper[0] - grid.lower[0];
  if (grid.dim == 2) extent = std::min(extent, grid.upper[1] - grid.lower[1]);
  double target = extent * std::pow(roundoff, 1.0 / (order + accuracy));
  int s = 1;
  while (2.0 * s * grid.max_spacing() <= target && stride_fits(grid, order, 2 * s, accuracy)) s *= 2;
  return s;
}

GridField mixed_derivative(const GridField& field, DerivativeKey key, int stride, int accuracy) {
  if (accuracy < 2 || accuracy % 2 != 0) throw ConfigError("derivative accuracy must be even and at least 2");
  const auto& g = field.box();
  if (g.dim == 1 && key[1] != 0) throw Error("derivative along a missing axis");
  GridField coarse = field;
  if (stride > 1) {
    BoxGrid cg = coarse_grid(g, stride);
    coarse = GridField(cg);
    for (std::size_t p = 0; p < cg.size(); ++p) {
      auto c = cg.coords(p);
      coarse[p] = field[g.index(c[0] * stride, c[1] * stride)];
    }
  }
  GridField d = axis_derivative(coarse, 0, key[0], accuracy);
  if (g.dim == 2) d = axis_derivative(d, 1, key[1], accuracy);
  if (stride == 1) return d;
  GridField out(g);
  for (std::size_t p = 0; p < g.size(); ++p) {
    auto c = g.coords(p);
    if (c[0] % stride == 0 && c[1] % stride == 0)
      out[p] = d[d.box().index(c[0] / stride, c[1] / stride)];
    else
      out[p] = interpolate_box(d, g.node(p));
  }
  return out;
}

DerivativeSet high_order_derivatives(const GridField& field, int order, const DerivativeOptions& options) {
  if (field.periodic()) throw Error("high_order_derivatives expects a box field");
  if (field.components() != 1) throw Error("high_order_derivatives expects a scalar field");
  const auto& g = field.box();
  const int acc = options.accuracy;
  if (!stride_fits(g, order, 1, acc))
    throw ResolutionError("grid too coarse for derivatives of order " + std::to_string(order));
  DerivativeSet set(field, order);
  for (int k = 1; k <= order; ++k) {
    int s = derivative_stride(g, k, options.roundoff, acc);
    for (int a1 = 0; a1 <= (g.dim == 2 ? k : 0); ++a1) {
      DerivativeKey key{k - a1, a1};
      GridField d = mixed_derivative(field, key, s, acc);
      double noise = 0.0;
      if (options.check_noise) {
        int other = stride_fits(g, k, 2 * s, acc) ? 2 * s : (s > 1 ? s / 2 : 0);
        if (other > 0) {
          noise = sup_diff(d, mixed_derivative(field, key, other, acc));
          double sup = sup_norm(d);
          if (noise > options.noise_tol * sup + options.noise_floor)
            throw ResolutionError("derivative (" + std::to_string(key[0]) + "," + std::to_string(key[1]) +
                                  ") fails the resolution-noise test: stride " + std::to_string(s) +
                                  " vs " + std::to_string(other) + " differ by " + std::to_string(noise) +
                                  " against sup " + std::to_string(sup));
        }
      }
      set.insert(key, std::move(d), s, noise);
    }
  }
  return set;
}

}  // namespace homog
