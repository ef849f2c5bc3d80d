#include "homog/catalog.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

namespace homog {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\"");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\"");
  return s.substr(b, e - b + 1);
}

double parse_plain(const std::string& s, const std::string& context) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ConfigError("not a number: '" + context + "'");
  return v;
}

int axis_arg(const std::vector<double>& args, std::size_t pos) {
  if (args.size() <= pos) return 0;
  double a = args[pos];
  if (a != 0.0 && a != 1.0) throw ConfigError("axis must be 0 or 1");
  return int(a);
}

void arity(const std::string& name, const std::vector<double>& args, std::size_t lo, std::size_t hi) {
  if (args.size() < lo || args.size() > hi)
    throw ConfigError(name + " expects " + std::to_string(lo) +
                      (hi != lo ? "-" + std::to_string(hi) : "") + " arguments");
}

}  // namespace

double parse_number(const std::string& text) {
  std::string s = trim(text);
  if (s.empty()) throw ConfigError("empty number");
  auto slash = s.find('/');
  if (slash == std::string::npos) return parse_plain(s, s);
  double num = parse_plain(trim(s.substr(0, slash)), s);
  double den = parse_plain(trim(s.substr(slash + 1)), s);
  if (den == 0.0) throw ConfigError("zero denominator in '" + s + "'");
  return num / den;
}

ScalarFunction constant_function(double c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "constant(%.17g)", c);
  return {buf, [c](const Point&) { return c; }};
}

std::vector<std::string> catalog_names() {
  return {"constant", "shifted_sine", "shifted_cosine", "sine_product",
          "exponential", "sine", "polynomial", "bowl"};
}

ScalarFunction parse_function(const std::string& raw) {
  const std::string text = trim(raw);
  auto open = text.find('(');
  if (open == std::string::npos || text.back() != ')') {
    // A bare number is shorthand for constant(c).
    try {
      return constant_function(parse_number(text));
    } catch (const ConfigError&) {
      throw ConfigError("expected name(args) or a number, got '" + text + "'");
    }
  }
  const std::string name = trim(text.substr(0, open));
  const std::string inner = text.substr(open + 1, text.size() - open - 2);
  std::vector<double> args;
  int poly_axis = 0;
  std::size_t start = 0;
  while (start <= inner.size()) {
    auto comma = inner.find(',', start);
    std::string tok = trim(inner.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!tok.empty()) {
      if (tok.rfind("axis=", 0) == 0)
        poly_axis = int(parse_number(tok.substr(5)));
      else
        args.push_back(parse_number(tok));
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (name == "constant") {
    arity(name, args, 1, 1);
    double c = args[0];
    return {text, [c](const Point&) { return c; }};
  }
  if (name == "shifted_sine" || name == "shifted_cosine") {
    arity(name, args, 2, 3);
    double amp = args[0], off = args[1];
    int ax = axis_arg(args, 2);
    if (name == "shifted_sine")
      return {text, [=](const Point& p) { return off + amp * std::sin(two_pi * p[ax]); }};
    return {text, [=](const Point& p) { return off + amp * std::cos(two_pi * p[ax]); }};
  }
  if (name == "sine_product") {
    arity(name, args, 2, 2);
    double amp = args[0], off = args[1];
    return {text, [=](const Point& p) {
              return off + amp * std::sin(two_pi * p[0]) * std::sin(two_pi * p[1]);
            }};
  }
  if (name == "exponential") {
    arity(name, args, 2, 3);
    double scale = args[0], rate = args[1];
    int ax = axis_arg(args, 2);
    return {text, [=](const Point& p) { return scale * std::exp(rate * p[ax]); }};
  }
  if (name == "sine") {
    arity(name, args, 2, 3);
    double amp = args[0], freq = args[1];
    int ax = axis_arg(args, 2);
    return {text, [=](const Point& p) { return amp * std::sin(freq * std::numbers::pi * p[ax]); }};
  }
  if (name == "polynomial") {
    if (args.empty()) throw ConfigError("polynomial expects coefficients");
    if (poly_axis != 0 && poly_axis != 1) throw ConfigError("axis must be 0 or 1");
    return {text, [args, poly_axis](const Point& p) {
              double v = 0.0;
              for (auto it = args.rbegin(); it != args.rend(); ++it) v = v * p[poly_axis] + *it;
              return v;
            }};
  }
  if (name == "bowl") {
    arity(name, args, 1, 1);
    double c = args[0];
    return {text, [c](const Point& p) { return c * (p[0] * p[0] + p[1] * p[1]); }};
  }
  throw ConfigError("unknown function '" + name + "'");
}

}  // namespace homog
