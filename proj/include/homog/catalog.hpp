#pragma once

#include <functional>
#include <string>
#include <vector>

#include "homog/types.hpp"

namespace homog {

/// Closed-form function of a point, built from the named catalog below.
///
///   constant(c)
///   shifted_sine(amplitude, offset[, axis])    offset + amplitude sin(2 pi t)
///   shifted_cosine(amplitude, offset[, axis])  offset + amplitude cos(2 pi t)
///   sine_product(amplitude, offset)            offset + amplitude sin(2 pi t0) sin(2 pi t1)
///   exponential(scale, rate[, axis])           scale exp(rate t)
///   sine(amplitude, frequency[, axis])         amplitude sin(frequency pi t)
///   polynomial(c0, c1, ...[, axis=k])          c0 + c1 t + ...
///   bowl(c)                                    c |t|^2
struct ScalarFunction {
  std::string text;
  std::function<double(const Point&)> eval;

  double operator()(const Point& p) const { return eval(p); }
};

/// Parses `name(args)`; throws ConfigError naming the offending text.
ScalarFunction parse_function(const std::string& text);

ScalarFunction constant_function(double c);

/// Parses a number, allowing a single fraction such as 1/16.
double parse_number(const std::string& text);

/// Names accepted by parse_function.
std::vector<std::string> catalog_names();

}  // namespace homog
