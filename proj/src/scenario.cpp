#include "homog/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace homog {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    s = s.substr(1, s.size() - 2);
  return trim(s);
}

// Comma or space separated numbers, with optional surrounding brackets.
std::vector<double> number_list(std::string s, int line) {
  s = unquote(s);
  for (char& c : s)
    if (c == '[' || c == ']' || c == ',' || c == ';') c = ' ';
  std::istringstream in(s);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    try {
      out.push_back(parse_number(tok));
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), line);
    }
  }
  if (out.empty()) throw ConfigError("empty list", line);
  return out;
}

int positive_int(const std::string& s, int line, const std::string& key) {
  auto v = number_list(s, line);
  if (v.size() != 1 || v[0] != double(int(v[0])) || v[0] <= 0)
    throw ConfigError(key + " must be a positive integer", line);
  return int(v[0]);
}

struct Entry {
  std::string value;
  int line = 0;
};

struct Section {
  std::string name;
  int line = 0;
  std::map<std::string, Entry> entries;
};

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "kind", "dim", "a", "a11", "a22", "a12", "f", "g", "form", "curvature", "m", "eps", "eps_max",
      "domain", "points_per_period", "min_points_per_period", "cell_nodes", "effective_nodes", "cell_method",
      "cross_validate"};
  return keys;
}

bool branch_key(const std::string& key, int& index, std::string& field) {
  if (key.rfind("branch", 0) != 0) return false;
  auto dot = key.find('.');
  if (dot == std::string::npos || dot == 6) return false;
  std::string num = key.substr(6, dot - 6);
  if (!std::all_of(num.begin(), num.end(), ::isdigit)) return false;
  index = std::stoi(num);
  field = key.substr(dot + 1);
  return index >= 1 && (field == "a" || field == "a11" || field == "a22" || field == "a12" || field == "f");
}

ScalarFunction function_at(const Section& s, const std::string& key) {
  const Entry& e = s.entries.at(key);
  try {
    return parse_function(unquote(e.value));
  } catch (const ConfigError& err) {
    throw ConfigError(key + ": " + err.what(), e.line);
  }
}

const Entry* find(const Section& s, const std::string& key) {
  auto it = s.entries.find(key);
  return it == s.entries.end() ? nullptr : &it->second;
}

Scenario build(const Section& s) {
  Scenario sc;
  sc.name = s.name;
  auto require = [&](const std::string& key) -> const Entry& {
    const Entry* e = find(s, key);
    if (!e) throw ConfigError("scenario '" + s.name + "' is missing '" + key + "'", s.line);
    return *e;
  };

  if (const Entry* e = find(s, "kind")) {
    std::string k = unquote(e->value);
    if (k == "linear") sc.kind = ScenarioKind::Linear;
    else if (k == "nonlinear") sc.kind = ScenarioKind::Nonlinear;
    else throw ConfigError("kind must be linear or nonlinear", e->line);
  }
  if (const Entry* e = find(s, "dim")) {
    sc.dim = positive_int(e->value, e->line, "dim");
    if (sc.dim > 2) throw ConfigError("dim must be 1 or 2", e->line);
  }
  if (sc.kind == ScenarioKind::Nonlinear) {
    if (const Entry* e = find(s, "form")) {
      std::string f = unquote(e->value);
      if (f == "linear") sc.form = OperatorForm::Linear;
      else if (f == "min_of_linear") sc.form = OperatorForm::MinOfLinear;
      else if (f == "sqrt_concave") sc.form = OperatorForm::SqrtConcave;
      else throw ConfigError("form must be linear, min_of_linear or sqrt_concave", e->line);
    } else {
      sc.form = OperatorForm::Linear;
    }
  } else if (const Entry* e = find(s, "form")) {
    throw ConfigError("form applies to nonlinear scenarios only", e->line);
  }

  const bool needs_a = sc.kind == ScenarioKind::Linear || sc.form != OperatorForm::MinOfLinear;
  if (needs_a) {
    if (sc.dim == 1) {
      require("a");
      sc.a11 = function_at(s, "a");
    } else {
      require("a11");
      require("a22");
      sc.a11 = function_at(s, "a11");
      sc.a22 = function_at(s, "a22");
      if (find(s, "a12")) {
        sc.a12 = function_at(s, "a12");
        sc.has_a12 = true;
      }
    }
  }
  if (sc.dim == 1)
    for (const char* k : {"a11", "a22", "a12"})
      if (const Entry* e = find(s, k)) throw ConfigError(std::string(k) + " needs dim = 2; use 'a' in 1D", e->line);
  if (sc.dim == 2)
    if (const Entry* e = find(s, "a")) throw ConfigError("use a11, a22, a12 in 2D", e->line);

  if (sc.kind == ScenarioKind::Linear || sc.form != OperatorForm::MinOfLinear) {
    require("f");
    sc.f = function_at(s, "f");
  }
  sc.g = find(s, "g") ? function_at(s, "g") : constant_function(0.0);

  if (sc.kind == ScenarioKind::Nonlinear && sc.form == OperatorForm::SqrtConcave) {
    require("curvature");
    sc.curvature = function_at(s, "curvature");
  } else if (const Entry* e = find(s, "curvature")) {
    throw ConfigError("curvature applies to form = sqrt_concave only", e->line);
  }

  std::map<int, std::map<std::string, const Entry*>> branches;
  for (const auto& [key, e] : s.entries) {
    int idx;
    std::string field;
    if (branch_key(key, idx, field)) branches[idx][field] = &e;
  }
  if (sc.kind == ScenarioKind::Nonlinear && sc.form == OperatorForm::MinOfLinear) {
    if (branches.size() < 2) throw ConfigError("min_of_linear needs at least two branches", s.line);
    int expect = 1;
    for (const auto& [idx, fields] : branches) {
      if (idx != expect++) throw ConfigError("branches must be numbered 1, 2, ...", s.line);
      std::string p = "branch" + std::to_string(idx) + ".";
      BranchSpec b;
      auto need = [&](const std::string& f) {
        if (!fields.count(f)) throw ConfigError("missing " + p + f, s.line);
        return function_at(s, p + f);
      };
      if (sc.dim == 1) {
        b.a11 = need("a");
      } else {
        b.a11 = need("a11");
        b.a22 = need("a22");
        if (fields.count("a12")) {
          b.a12 = function_at(s, p + "a12");
          b.has_a12 = true;
        }
      }
      b.f = need("f");
      sc.branches.push_back(std::move(b));
    }
  } else if (!branches.empty()) {
    throw ConfigError("branch keys apply to form = min_of_linear only", branches.begin()->second.begin()->second->line);
  }

  if (const Entry* e = find(s, "m")) {
    sc.orders.clear();
    for (double v : number_list(e->value, e->line)) {
      if (v != double(int(v))) throw ConfigError("m must be an integer", e->line);
      int m = int(v);
      int hi = sc.kind == ScenarioKind::Linear ? 6 : 5;
      if (m < 2 || m > hi)
        throw ConfigError("m must lie in [2, " + std::to_string(hi) + "] for " + sc.kind_name() + " scenarios", e->line);
      sc.orders.push_back(m);
    }
    std::sort(sc.orders.begin(), sc.orders.end());
    sc.orders.erase(std::unique(sc.orders.begin(), sc.orders.end()), sc.orders.end());
  }

  const Entry& eps_entry = require("eps");
  sc.eps = number_list(eps_entry.value, eps_entry.line);
  sc.eps_max = sc.eps.front();
  if (const Entry* e = find(s, "eps_max")) {
    auto v = number_list(e->value, e->line);
    if (v.size() != 1) throw ConfigError("eps_max takes one value", e->line);
    sc.eps_max = v[0];
    if (!(sc.eps_max > 0.0 && sc.eps_max < 1.0)) throw ConfigError("epsilon out of range: eps_max must lie in (0, 1)", e->line);
  }
  for (std::size_t i = 0; i < sc.eps.size(); ++i) {
    double v = sc.eps[i];
    if (!(v > 0.0 && v <= sc.eps_max && v < 1.0))
      throw ConfigError("epsilon out of range: " + trim(std::to_string(v)) + " is not in (0, eps_max] with eps_max < 1",
                        eps_entry.line);
    if (i > 0 && !(v < sc.eps[i - 1])) throw ConfigError("epsilon out of range: list must strictly decrease", eps_entry.line);
  }

  if (const Entry* e = find(s, "domain")) {
    auto v = number_list(e->value, e->line);
    if (int(v.size()) != 2 * sc.dim)
      throw ConfigError("domain needs " + std::to_string(2 * sc.dim) + " numbers (lower upper per axis)", e->line);
    for (int a = 0; a < sc.dim; ++a) {
      sc.lower[a] = v[2 * a];
      sc.upper[a] = v[2 * a + 1];
      if (!(sc.upper[a] > sc.lower[a])) throw ConfigError("domain upper must exceed lower", e->line);
    }
  }
  if (sc.dim == 1) sc.lower[1] = sc.upper[1] = 0.0;

  if (const Entry* e = find(s, "points_per_period")) sc.points_per_period = positive_int(e->value, e->line, "points_per_period");
  if (const Entry* e = find(s, "min_points_per_period"))
    sc.min_points_per_period = positive_int(e->value, e->line, "min_points_per_period");
  if (sc.points_per_period < sc.min_points_per_period)
    throw ConfigError("points_per_period below min_points_per_period", s.line);
  if (const Entry* e = find(s, "cell_nodes")) {
    sc.cell_nodes = positive_int(e->value, e->line, "cell_nodes");
    if (sc.cell_nodes < 8) throw ConfigError("cell_nodes must be at least 8", e->line);
  }
  if (const Entry* e = find(s, "effective_nodes")) {
    sc.effective_nodes = positive_int(e->value, e->line, "effective_nodes");
    if (sc.effective_nodes < 16) throw ConfigError("effective_nodes must be at least 16", e->line);
  }
  if (const Entry* e = find(s, "cell_method")) {
    std::string m = unquote(e->value);
    if (m == "direct") sc.cell_method = CellMethod::Direct;
    else if (m == "delta_schedule") sc.cell_method = CellMethod::DeltaSchedule;
    else throw ConfigError("cell_method must be direct or delta_schedule", e->line);
  }
  if (const Entry* e = find(s, "cross_validate")) {
    std::string v = unquote(e->value);
    if (v == "true" || v == "1") sc.cross_validate = true;
    else if (v == "false" || v == "0") sc.cross_validate = false;
    else throw ConfigError("cross_validate must be true or false", e->line);
  }

  // Structural checks run here so config errors surface before any solve.
  try {
    if (sc.kind == ScenarioKind::Linear) (void)sc.coefficient();
    else (void)sc.op();
  } catch (const AdmissibilityError& err) {
    throw ConfigError(std::string("scenario '") + s.name + "': " + err.what(), s.line);
  }
  return sc;
}

CoefficientField make_coefficient(int dim, const ScalarFunction& a11, const ScalarFunction& a22,
                                  const ScalarFunction& a12, bool has_a12) {
  if (dim == 1) return CoefficientField::scalar(a11);
  return CoefficientField::entries(a11, a22, has_a12 ? &a12 : nullptr);
}

}  // namespace

CoefficientField Scenario::coefficient() const {
  if (kind == ScenarioKind::Nonlinear && form == OperatorForm::MinOfLinear)
    throw ConfigError("min_of_linear scenarios have no single coefficient field");
  return make_coefficient(dim, a11, a22, a12, has_a12);
}

NonlinearOperator Scenario::op() const {
  if (kind == ScenarioKind::Linear || form == OperatorForm::Linear) return NonlinearOperator::linear(coefficient(), f);
  if (form == OperatorForm::SqrtConcave) return NonlinearOperator::sqrt_concave(coefficient(), curvature, f);
  std::vector<LinearBranch> list;
  for (const auto& b : branches) list.push_back({make_coefficient(dim, b.a11, b.a22, b.a12, b.has_a12), b.f});
  return NonlinearOperator::min_of_linear(std::move(list));
}

BoxGrid Scenario::effective_grid() const {
  return BoxGrid(dim, lower, upper, {effective_nodes, dim == 2 ? effective_nodes : 0});
}

TorusGrid Scenario::cell_grid() const { return TorusGrid(dim, cell_nodes); }

std::vector<Scenario> load_scenarios(const std::string& text) {
  std::vector<Section> sections;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto hash = raw.find('#');
    std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("unterminated section header", line);
      std::string inner = trim(s.substr(1, s.size() - 2));
      if (inner.rfind("scenario", 0) != 0) throw ConfigError("section must read [scenario NAME]", line);
      std::string name = trim(inner.substr(8));
      if (name.empty()) throw ConfigError("scenario needs a name", line);
      for (const auto& sec : sections)
        if (sec.name == name) throw ConfigError("duplicate scenario '" + name + "'", line);
      sections.push_back({name, line, {}});
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", line);
    if (sections.empty()) throw ConfigError("key outside a [scenario NAME] section", line);
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    int idx;
    std::string field;
    if (!known_keys().count(key) && !branch_key(key, idx, field)) throw ConfigError("unknown key '" + key + "'", line);
    if (value.empty()) throw ConfigError("empty value for '" + key + "'", line);
    auto& entries = sections.back().entries;
    if (entries.count(key)) throw ConfigError("duplicate key '" + key + "'", line);
    entries[key] = {value, line};
  }
  if (sections.empty()) throw ConfigError("no [scenario NAME] section found");
  std::vector<Scenario> out;
  for (const auto& s : sections) out.push_back(build(s));
  return out;
}

Scenario load_scenario(const std::string& text) { return load_scenarios(text).front(); }

std::vector<Scenario> load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenarios(ss.str());
}

}  // namespace homog
