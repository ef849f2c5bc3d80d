// One line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "homog/catalog.hpp"
#include "homog/effective_solver.hpp"
#include "homog/linear_cell.hpp"
#include "homog/linear_expansion.hpp"
#include "homog/nonlinear_effective.hpp"
#include "homog/nonlinear_expansion.hpp"
#include "homog/scenario.hpp"
#include "homog/study.hpp"

using namespace homog;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Outcome {
  bool passed = false;
  std::string detail;
};

int failures = 0;

void run(int id, const std::string& title, double time_limit_s, const std::function<Outcome()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (time_limit_s > 0 && secs > time_limit_s) {
    o.passed = false;
    o.detail += "; over the time limit of " + std::to_string(int(time_limit_s)) + " s";
  }
  if (!o.passed) ++failures;
  std::printf("%s criterion %2d  %-44s %s (%.2f s)\n", o.passed ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(),
              secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// Periodic trapezoid rule; spectrally accurate for smooth periodic integrands.
double periodic_mean(const std::function<double(double)>& g, int n = 1 << 18) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += g(double(i) / n);
  return s / n;
}

std::string source(const std::string& rel) { return std::string(HOMOG_SOURCE_DIR) + "/" + rel; }

Scenario shipped(const std::string& rel) { return load_scenario_file(source(rel)).front(); }

SymMatrix scalar_matrix(double v) {
  SymMatrix M = SymMatrix::Zero();
  M(0, 0) = v;
  return M;
}

const StudyRow* row_at(const ConvergenceReport& rep, int m, double eps) {
  for (const auto& r : rep.rows)
    if (r.m == m && r.eps == eps) return &r;
  return nullptr;
}

std::optional<double> slope_of(const ConvergenceReport& rep, int m) {
  for (const auto& s : rep.slopes)
    if (s.m == m) return s.slope;
  return std::nullopt;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Random smooth periodic field with eigenvalues in [1, 4]: rotation by a
// trigonometric angle of a diagonal with trigonometric entries.
CoefficientField random_coefficient(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), phase(0.0, 1.0);
  struct Trig {
    std::array<double, 4> c, p;
    std::array<std::array<int, 2>, 4> k;
    double operator()(const Point& y) const {
      double s = 0.0, norm = 0.0;
      for (int i = 0; i < 4; ++i) {
        s += c[i] * std::sin(kTwoPi * (k[i][0] * y[0] + k[i][1] * y[1] + p[i]));
        norm += std::abs(c[i]);
      }
      return s / norm;
    }
  };
  auto make = [&] {
    Trig t;
    for (int i = 0; i < 4; ++i) {
      t.c[i] = u(rng);
      t.p[i] = phase(rng);
      t.k[i] = {int(3 * phase(rng)), int(3 * phase(rng))};
      if (t.k[i][0] == 0 && t.k[i][1] == 0) t.k[i][0] = 1;
    }
    return t;
  };
  Trig l1 = make(), l2 = make(), th = make();
  auto eval = [=](const Point& y) {
    double a = 2.5 + 1.5 * l1(y), b = 2.5 + 1.5 * l2(y), t = std::numbers::pi * th(y);
    Eigen::Matrix2d R;
    R << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    Eigen::Matrix2d D = Eigen::Vector2d(a, b).asDiagonal();
    SymMatrix A = R * D * R.transpose();
    return SymMatrix(0.5 * (A + A.transpose()));
  };
  return CoefficientField(2, eval, "random rotated field");
}

}  // namespace

int main() {
  std::setvbuf(stdout, nullptr, _IOLBF, 0);

  run(1, "effective coefficient anchor", 1.0, [] {
    auto A = CoefficientField::scalar(parse_function("shifted_sine(1, 2)"));
    double a_bar = effective_matrix(A, TorusGrid(1, 1024)).a_bar({0, 0});
    double oracle = 1.0 / periodic_mean([](double y) { return 1.0 / (2.0 + std::sin(kTwoPi * y)); });
    double err = std::abs(a_bar - oracle);
    return Outcome{err <= 1e-6 && std::abs(oracle - std::sqrt(3.0)) < 1e-12,
                   fmt("a_bar=%.12f harmonic mean=%.12f |diff|=%.2e", a_bar, oracle, err)};
  });

  run(2, "ellipticity inheritance", 30.0, [] {
    std::mt19937 rng(12345u);
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i < 20; ++i) {
      CoefficientField A = random_coefficient(rng);
      A.require_bounds(1.0, 4.0);
      auto ev = eigenvalues(effective_matrix(A, TorusGrid(2, 32)).a_bar_matrix(), 2);
      lo = std::min(lo, ev[0]);
      hi = std::max(hi, ev[1]);
    }
    return Outcome{lo >= 0.999 && hi <= 4.001, fmt("20 fields, eig(a_bar) in [%.4f, %.4f]", lo, hi)};
  });

  run(3, "1D third-order tensor vanishes", 0, [] {
    std::vector<CoefficientField> fields = {
        CoefficientField::scalar(parse_function("shifted_sine(1, 2)")),
        CoefficientField::scalar(parse_function("shifted_cosine(0.5, 2)")),
        CoefficientField::scalar(parse_function("shifted_sine(0.9, 1)")),
        CoefficientField(
            1, [](const Point& y) { return SymMatrix(std::exp(std::sin(kTwoPi * y[0])) * SymMatrix::Identity()); },
            "exp(sin)"),
        CoefficientField(
            1,
            [](const Point& y) {
              return SymMatrix((2.0 + std::sin(kTwoPi * y[0]) + 0.5 * std::cos(2 * kTwoPi * y[0])) *
                               SymMatrix::Identity());
            },
            "two modes"),
    };
    double worst = 0.0;
    for (const auto& A : fields) worst = std::max(worst, std::abs(chi_recursion(A, TorusGrid(1, 1024), 3).a_bar({0, 0, 0})));
    return Outcome{worst <= 1e-8, fmt("5 coefficients, max |a_bar_111| = %.2e", worst)};
  });

  // Criteria 4-7 share the shipped linear sweep.
  Scenario linear = shipped("scenarios/linear_1d.cfg");
  auto t_lin = std::chrono::steady_clock::now();
  ConvergenceReport lin_rep = run_convergence_study(linear);
  double lin_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_lin).count();

  run(4, "linear m=2 convergence slope", 120.0, [&] {
    auto s = slope_of(lin_rep, 2);
    bool rows_ok = std::all_of(lin_rep.rows.begin(), lin_rep.rows.end(), [](const StudyRow& r) { return r.ok; });
    return Outcome{rows_ok && s && *s >= 0.7 && lin_secs < 120,
                   fmt("slope %.3f over eps 1/8..1/64, h = eps/32; sweep %.2f s", s.value_or(NAN), lin_secs)};
  });

  run(5, "linear m=3 slope and order comparison", 300.0, [&] {
    auto s = slope_of(lin_rep, 3);
    bool better = true;
    std::string cmp;
    for (double eps : linear.eps) {
      if (eps > 1.0 / 16) continue;
      auto* r2 = row_at(lin_rep, 2, eps);
      auto* r3 = row_at(lin_rep, 3, eps);
      if (!r2 || !r3 || !r2->ok || !r3->ok || !(r3->error_sup <= r2->error_sup)) better = false;
    }
    return Outcome{s && *s >= 1.7 && better,
                   fmt("slope %.3f; error(m=3) <= error(m=2) at eps <= 1/16: %s", s.value_or(NAN),
                       better ? "yes" : "no")};
  });

  run(6, "residual phi uniform across the sweep", 0, [&] {
    double worst = 0.0;
    for (int m : linear.orders) {
      double lo = 1e300, hi = 0.0;
      for (const auto& r : lin_rep.rows)
        if (r.m == m && r.ok) {
          double phi = r.details["phi_sup"].get<double>();
          lo = std::min(lo, phi);
          hi = std::max(hi, phi);
        }
      worst = std::max(worst, hi / lo);
    }
    return Outcome{worst < 2.0, fmt("max over m of sup|phi| ratio across eps = %.3f", worst)};
  });

  run(7, "first boundary corrector vanishes", 0, [&] {
    std::vector<ConvergenceReport> reports = {lin_rep};
    reports.push_back(run_convergence_study(shipped("scenarios/anchors/constant_1d.cfg")));
    reports.push_back(run_convergence_study(shipped("scenarios/anchors/linear_2d.cfg")));
    double worst = 0.0;
    int rows = 0;
    for (const auto& rep : reports)
      for (const auto& r : rep.rows) {
        if (!r.ok) return Outcome{false, r.scenario + ": " + r.diagnostic};
        worst = std::max(worst, r.details["z_sup"][0].get<double>());
        ++rows;
      }
    return Outcome{worst <= 1e-9, fmt("%d rows over 3 linear scenarios, max sup|z_1| = %.2e", rows, worst)};
  });

  run(8, "min-of-linear effective anchor", 0, [] {
    auto a = parse_function("shifted_sine(1, 2)");
    auto b = parse_function("shifted_cosine(1, 2.5)");
    auto F = NonlinearOperator::min_of_linear({{CoefficientField::scalar(a), constant_function(0.0)},
                                               {CoefficientField::scalar(b), constant_function(0.0)}});
    NonlinearCell cell(F, TorusGrid(1, 1024));
    auto lo = [&](double y) { return std::min(a({y, 0}), b({y, 0})); };
    auto hi = [&](double y) { return std::max(a({y, 0}), b({y, 0})); };
    double h_min = 1.0 / periodic_mean([&](double y) { return 1.0 / lo(y); });
    double h_max = 1.0 / periodic_mean([&](double y) { return 1.0 / hi(y); });
    auto up = cell.effective_F(scalar_matrix(1.0), {0, 0});
    auto down = cell.effective_F(scalar_matrix(-1.0), {0, 0});
    // Sign condition: 1 + w'' > 0 for M = 1 and -1 + w'' < 0 for M = -1.
    auto sign_holds = [](const GridField& w, double M) {
      GridField d2 = second_difference(w, 0, 0);
      for (double v : d2.values())
        if ((M + v) * M <= 0.0) return false;
      return true;
    };
    double e1 = std::abs(up.F_bar - h_min), e2 = std::abs(down.F_bar + h_max);
    bool signs = sign_holds(up.w, 1.0) && sign_holds(down.w, -1.0);
    return Outcome{e1 <= 1e-4 && e2 <= 1e-4 && signs,
                   fmt("|F(1)-H(min)|=%.2e |F(-1)+H(max)|=%.2e, sign condition %s", e1, e2, signs ? "holds" : "fails")};
  });

  run(9, "concavity and ellipticity of F_bar", 0, [] {
    std::mt19937 rng(777u);
    std::uniform_real_distribution<double> u(-2.0, 2.0), pos(0.0, 2.0), xs(0.0, 1.0);
    std::vector<Scenario> ops = {shipped("scenarios/nonlinear_1d.cfg"),
                                shipped("scenarios/anchors/min_of_linear_1d.cfg")};
    double worst_mid = -1e300, worst_ell = -1e300;
    int bad = 0;
    for (const auto& s : ops) {
      NonlinearOperator F = s.op();
      NonlinearCell cell(F, s.cell_grid());
      for (int i = 0; i < 25; ++i) {
        Point x{xs(rng), 0.0};
        SymMatrix M = scalar_matrix(u(rng)), N = scalar_matrix(u(rng)), P = scalar_matrix(pos(rng));
        auto Fb = [&](const SymMatrix& A) { return cell.effective_F(A, x).F_bar; };
        double slack = 1e-6 * (1.0 + M.norm() + N.norm());
        double mid = 0.5 * (Fb(M) + Fb(N)) - Fb(0.5 * (M + N));
        double inc = Fb(M + P) - Fb(M);
        double ell = std::max(F.lambda() * P.trace() - inc, inc - F.Lambda() * P.trace());
        worst_mid = std::max(worst_mid, mid / slack);
        worst_ell = std::max(worst_ell, ell / (1e-6 * (1.0 + M.norm() + P.norm())));
        if (mid > slack || ell > 1e-6 * (1.0 + M.norm() + P.norm())) ++bad;
      }
    }
    return Outcome{bad == 0, fmt("50 probe pairs, %d failures; worst midpoint/slack %.2e, bracket/slack %.2e", bad,
                                 worst_mid, worst_ell)};
  });

  run(10, "linearised derivative consistency", 0, [] {
    Scenario s = shipped("scenarios/nonlinear_1d.cfg");
    NonlinearOperator F = s.op();
    NonlinearCell cell(F, s.cell_grid());
    std::mt19937 rng(4242u);
    std::uniform_real_distribution<double> u(-2.0, 2.0), xs(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      SymMatrix M = scalar_matrix(u(rng));
      Point x{xs(rng), 0.0};
      auto smp = cell.sample(M, x);
      const double h = 1e-3;
      double fd = (cell.effective_F(M + scalar_matrix(h), x).F_bar - cell.effective_F(M - scalar_matrix(h), x).F_bar) /
                  (2 * h);
      worst = std::max(worst, std::abs(smp.dF_dp(0, 0) - fd) / std::abs(fd));
    }
    return Outcome{worst <= 1e-4, fmt("10 probes, max relative gap %.2e", worst)};
  });

  run(11, "linear operator through the nonlinear pipeline", 0, [&] {
    Scenario as_nl = linear;
    as_nl.kind = ScenarioKind::Nonlinear;
    as_nl.form = OperatorForm::Linear;
    as_nl.orders = {2};
    NonlinearOperator F = as_nl.op();
    NonlinearCell cell(F, as_nl.cell_grid());
    EffectiveOperator F_bar(cell, std::make_shared<EffectiveCache>());
    GridField u_nl = solve_effective_nl(F_bar, sample_box(as_nl.effective_grid(), as_nl.g));
    auto h = build_hierarchy(F_bar, u_nl);

    CoefficientField A = linear.coefficient();
    auto tensors = std::make_shared<EffectiveTensors>(chi_recursion(A, linear.cell_grid(), 2));
    GridField u_lin = solve_effective_dirichlet(tensors->a_bar_matrix(), sample_box(linear.effective_grid(), linear.f),
                                                sample_box(linear.effective_grid(), linear.g));
    auto chain = solve_psi_chain(*tensors, u_lin, 2);
    double a_gap = std::abs(F_bar.evaluate(SymMatrix::Zero(), {0.3, 0.0}).dF_dp(0, 0) - tensors->a_bar({0, 0}));
    double u_gap = sup_diff(u_nl, u_lin);
    const auto& chi = tensors->at({0, 0}).chi;
    const auto& d2u = chain.derivatives[0].get({2, 0});
    double w_gap = 0.0;
    for (std::size_t q = 0; q < h.outer.size(); ++q)
      for (std::size_t p = 0; p < h.cell.size(); ++p)
        w_gap = std::max(w_gap, std::abs(h.w[2].at(p, q) - chi[p] * d2u[q]));

    double worst_ratio = 1.0;
    for (double eps : linear.eps) {
      auto r = assemble_expansion_nl(F, h, as_nl.g, eps, as_nl.points_per_period, as_nl.min_points_per_period);
      auto* lr = row_at(lin_rep, 2, eps);
      if (!lr || !lr->ok) return Outcome{false, "linear row missing"};
      double ratio = std::max(r.error_sup / lr->error_sup, lr->error_sup / r.error_sup);
      worst_ratio = std::max(worst_ratio, ratio);
    }
    bool ok = a_gap <= 1e-6 && u_gap <= 1e-6 && w_gap <= 1e-6 && worst_ratio <= 2.0;
    return Outcome{ok, fmt("|a_bar| gap %.1e, |u| gap %.1e, |w_2| gap %.1e, m=2 error ratio %.4f", a_gap, u_gap, w_gap,
                           worst_ratio)};
  });

  run(12, "nonlinear m=2 slope and barrier", 600.0, [] {
    auto rep = run_convergence_study(shipped("scenarios/nonlinear_1d.cfg"));
    auto s = slope_of(rep, 2);
    int passed = 0, rows = 0;
    double worst = -1e300;
    for (const auto& r : rep.rows) {
      ++rows;
      if (!r.ok) continue;
      passed += r.details["barrier"]["passed"].get<bool>();
      worst = std::max(worst, r.details["barrier"]["worst_violation"].get<double>());
    }
    return Outcome{s && *s >= 0.7 && passed == rows,
                   fmt("slope %.3f; barrier holds on %d/%d rows, worst bracket margin %.2e", s.value_or(NAN), passed,
                       rows, worst)};
  });

  run(13, "corrector uniqueness across delta schedules", 0, [] {
    const auto halving = DeltaSchedule::halving(4, 14);
    const auto thirding = DeltaSchedule::thirding(3, 9);
    double worst_gamma = 0.0, worst_w = 0.0;
    auto linear_case = [&](const CoefficientField& A, const TorusGrid& g, const SymMatrix& M) {
      CellOperator L(A, g);
      GridField rhs(g);
      for (std::size_t p = 0; p < g.size(); ++p) rhs[p] = contract(A(g.node(p)), M, g.dim);
      auto a = L.solve_schedule(rhs, halving, 1e-8);
      auto b = L.solve_schedule(rhs, thirding, 1e-8);
      worst_gamma = std::max(worst_gamma, std::abs(a.gamma - b.gamma));
      worst_w = std::max(worst_w, sup_diff(a.w, b.w));
    };
    auto nonlinear_case = [&](const NonlinearOperator& F, const TorusGrid& g, const SymMatrix& M) {
      NonlinearCellOptions oa, ob;
      oa.method = ob.method = CellMethod::DeltaSchedule;
      oa.schedule = halving;
      ob.schedule = thirding;
      auto a = NonlinearCell(F, g, oa).effective_F(M, {0.5, 0.0});
      auto b = NonlinearCell(F, g, ob).effective_F(M, {0.5, 0.0});
      worst_gamma = std::max(worst_gamma, std::abs(a.F_bar - b.F_bar));
      worst_w = std::max(worst_w, sup_diff(a.w, b.w));
    };
    auto a1 = CoefficientField::scalar(parse_function("shifted_sine(1, 2)"));
    auto a2 = CoefficientField::scalar(parse_function("shifted_cosine(0.5, 1.5)"));
    auto a3 = CoefficientField::entries(parse_function("shifted_sine(0.5, 2, 0)"),
                                        parse_function("shifted_cosine(0.5, 2, 1)"));
    linear_case(a1, TorusGrid(1, 256), scalar_matrix(1.0));
    linear_case(a2, TorusGrid(1, 256), scalar_matrix(1.0));
    SymMatrix M2;
    M2 << 1.0, 0.0, 0.0, 0.5;
    linear_case(a3, TorusGrid(2, 32), M2);
    nonlinear_case(NonlinearOperator::sqrt_concave(a1, constant_function(0.5), constant_function(0.0)),
                   TorusGrid(1, 256), scalar_matrix(0.8));
    nonlinear_case(NonlinearOperator::min_of_linear({{a1, constant_function(0.0)}, {a2, constant_function(0.0)}}),
                   TorusGrid(1, 256), scalar_matrix(1.0));
    return Outcome{worst_gamma <= 1e-6 && worst_w <= 1e-6,
                   fmt("5 cell problems, halving vs thirding: |gamma| %.2e, |w| %.2e", worst_gamma, worst_w)};
  });

  run(14, "deterministic converge output", 0, [] {
    namespace fs = std::filesystem;
    fs::path base = fs::temp_directory_path() / "homog_determinism";
    fs::remove_all(base);
    std::vector<std::string> configs = {"scenarios/linear_1d.cfg", "scenarios/nonlinear_1d.cfg"};
    std::string detail;
    bool same = true;
    for (const auto& cfg : configs) {
      std::vector<std::string> csv;
      for (int workers : {2, 2, 1}) {
        fs::path out = base / std::to_string(csv.size());
        std::string cmd = std::string("\"") + HOMOG_CLI + "\" converge --config \"" + source(cfg) + "\" --out \"" +
                          out.string() + "\" --workers " + std::to_string(workers) + " > /dev/null";
        if (std::system(cmd.c_str()) != 0) return Outcome{false, "converge failed for " + cfg};
        csv.push_back(read_file(out / "report.csv"));
        fs::remove_all(out);
      }
      bool ok = !csv[0].empty() && csv[0] == csv[1] && csv[0] == csv[2];
      same = same && ok;
      detail += fs::path(cfg).stem().string() + (ok ? " identical; " : " differs; ");
    }
    fs::remove_all(base);
    return Outcome{same, detail + "3 runs each (workers 2, 2, 1)"};
  });

  std::printf("%d of 14 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
