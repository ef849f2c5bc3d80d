#include "homog/study.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <thread>

#include "homog/effective_solver.hpp"
#include "homog/linear_expansion.hpp"
#include "homog/nonlinear_expansion.hpp"

namespace homog {

namespace {

using Clock = std::chrono::steady_clock;

CellOptions cell_options(const Scenario& s) {
  CellOptions o;
  o.method = s.cell_method;
  o.cross_validate = s.cross_validate;
  return o;
}

NonlinearCellOptions nonlinear_cell_options(const Scenario& s) {
  NonlinearCellOptions o;
  o.method = s.cell_method;
  o.cross_validate = s.cross_validate;
  return o;
}

// Runs task(i) for i in [0, n) on at most `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& task) {
  std::size_t threads = std::min<std::size_t>(std::max(workers, 1), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) task(i);
    });
  for (auto& th : pool) th.join();
}

// Grid with every other node of `grid`.
BoxGrid half_grid(const BoxGrid& grid) {
  std::array<int, 2> iv{grid.intervals[0] / 2, grid.dim == 2 ? grid.intervals[1] / 2 : 0};
  return BoxGrid(grid.dim, grid.lower, grid.upper, iv);
}

// Richardson estimate of the second-order discretisation error of `fine`
// from a solve on the half-resolution grid.
double effective_floor(const GridField& fine, const GridField& coarse) {
  const auto& cg = coarse.box();
  const auto& fg = fine.box();
  double d = 0.0;
  for (std::size_t p = 0; p < cg.size(); ++p) {
    auto c = cg.coords(p);
    d = std::max(d, std::abs(coarse[p] - fine[fg.index(2 * c[0], 2 * c[1])]));
  }
  return d / 3.0;
}

double row_floor(double eff_floor, const BoxGrid& eff, const Scenario& s, double eps) {
  BoxGrid g = eps_grid(eff, eps, s.points_per_period);
  double r = g.max_spacing() / eff.max_spacing();
  return eff_floor * (1.0 + r * r);
}

nlohmann::json matrix_json(const SymMatrix& M, int dim) {
  if (dim == 1) return nlohmann::json::array({M(0, 0)});
  return nlohmann::json::array({M(0, 0), M(1, 1), M(0, 1)});
}

double chi_checksum(const GridField& chi) {
  double s = 0.0;
  for (double v : chi.values()) s += std::abs(v);
  return s / double(chi.nodes());
}

nlohmann::json tensor_rows(const EffectiveTensors& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [index, e] : t.entries())
    rows.push_back({{"order", int(index.size())},
                    {"index_tuple", index},
                    {"a_bar_value", e.a_bar},
                    {"chi_checksum", chi_checksum(e.chi)}});
  return rows;
}

std::vector<SymMatrix> probe_matrices(int dim) {
  std::vector<SymMatrix> out;
  if (dim == 1) {
    for (double v : {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0}) {
      SymMatrix M = SymMatrix::Zero();
      M(0, 0) = v;
      out.push_back(M);
    }
    return out;
  }
  for (double a : {-1.0, 0.0, 1.0})
    for (double b : {-1.0, 0.0, 1.0}) {
      SymMatrix M = SymMatrix::Zero();
      M(0, 0) = a;
      M(1, 1) = b;
      out.push_back(M);
    }
  return out;
}

Point center(const Scenario& s) { return {(s.lower[0] + s.upper[0]) / 2, (s.lower[1] + s.upper[1]) / 2}; }

nlohmann::json nonlinear_table(const NonlinearCell& cell, const Scenario& s) {
  nlohmann::json rows = nlohmann::json::array();
  const Point x = center(s);
  GridField warm;
  for (const auto& M : probe_matrices(s.dim)) {
    auto e = cell.sample(M, x, warm.nodes() ? &warm : nullptr);
    warm = e.w;
    rows.push_back({{"M", matrix_json(M, s.dim)},
                    {"x", s.dim == 1 ? nlohmann::json::array({x[0]}) : nlohmann::json::array({x[0], x[1]})},
                    {"F_bar", e.F_bar},
                    {"dF_dp", matrix_json(e.dF_dp, s.dim)},
                    {"residual", e.residual}});
  }
  return rows;
}

StudyRow blank_row(const Scenario& s, int m, double eps) {
  StudyRow r;
  r.scenario = s.name;
  r.kind = s.kind_name();
  r.m = m;
  r.eps = eps;
  return r;
}

// Runs `body` for every row, catching failures into the row diagnostic.
void run_rows(std::vector<StudyRow>& rows, int workers, const std::function<void(StudyRow&)>& body) {
  parallel_for(rows.size(), workers, [&](std::size_t i) {
    auto t0 = Clock::now();
    try {
      body(rows[i]);
      rows[i].ok = true;
    } catch (const std::exception& e) {
      rows[i].ok = false;
      rows[i].diagnostic = e.what();
    }
    rows[i].wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  });
}

void fail_all(std::vector<StudyRow>& rows, const std::string& why) {
  for (auto& r : rows) {
    r.ok = false;
    r.diagnostic = why;
  }
}

void linear_study(const Scenario& s, const StudyOptions& opt, ConvergenceReport& rep) {
  const CoefficientField A = s.coefficient();
  const BoxGrid eff = s.effective_grid();
  const int max_m = s.orders.back();
  auto tensors = std::make_shared<EffectiveTensors>(chi_recursion(A, s.cell_grid(), max_m, cell_options(s)));
  const SymMatrix a_bar = tensors->a_bar_matrix();
  GridField rhs = sample_box(eff, s.f), bc = sample_box(eff, s.g);
  GridField u = solve_effective_dirichlet(a_bar, rhs, bc);
  const BoxGrid coarse = half_grid(eff);
  GridField u_coarse = solve_effective_dirichlet(a_bar, sample_box(coarse, s.f), sample_box(coarse, s.g));
  const double eff_floor = effective_floor(u, u_coarse);

  rep.tensors = tensor_rows(*tensors);
  nlohmann::json orders = nlohmann::json::array();
  for (int k = 2; k <= max_m; ++k) {
    double sup_a = 0.0, sup_chi = 0.0, res = 0.0;
    for (const auto& t : index_tuples(s.dim, k)) {
      const auto& e = tensors->at(t);
      sup_a = std::max(sup_a, std::abs(e.a_bar));
      sup_chi = std::max(sup_chi, sup_norm(e.chi));
      res = std::max(res, e.residual);
    }
    orders.push_back({{"order", k}, {"a_bar_sup", sup_a}, {"chi_sup", sup_chi}, {"cell_residual", res}});
  }
  rep.summary["a_bar"] = matrix_json(a_bar, s.dim);
  rep.summary["tensors"] = orders;
  rep.summary["effective_residual"] = dirichlet_residual(eff, [&](std::size_t) { return a_bar; }, u, rhs);
  rep.summary["u_sup"] = sup_norm(u);
  rep.summary["effective_floor"] = eff_floor;

  std::map<int, std::shared_ptr<LinearCorrectors>> correctors;
  nlohmann::json chains = nlohmann::json::array();
  for (int m : s.orders) {
    auto chain = std::make_shared<PsiChain>(solve_psi_chain(*tensors, u, m));
    nlohmann::json psi = nlohmann::json::array();
    for (int k = 1; k < int(chain->psi.size()); ++k) psi.push_back(sup_norm(chain->psi[k]));
    chains.push_back({{"m", m}, {"psi_sup", psi}, {"residuals", chain->residuals}});
    correctors[m] = std::make_shared<LinearCorrectors>(tensors, chain);
  }
  rep.summary["psi_chains"] = chains;

  run_rows(rep.rows, opt.workers, [&](StudyRow& row) {
    auto r = assemble_expansion(*correctors.at(row.m), A, u, s.f, s.g, row.eps, s.points_per_period,
                                s.min_points_per_period);
    row.error_sup = r.error_sup;
    row.theta_sup = r.theta_sup;
    row.residual_sup = std::pow(row.eps, row.m - 1) * r.phi_sup;
    row.floor = row_floor(eff_floor, eff, s, row.eps);
    nlohmann::json z = nlohmann::json::array();
    for (const auto& zk : r.z) z.push_back(sup_norm(zk));
    row.details = {{"phi_sup", r.phi_sup},
                   {"identity_residual", r.identity_residual},
                   {"u_eps_residual", r.u_eps_residual},
                   {"z_sup", z},
                   {"nodes", r.u_eps.nodes()},
                   {"floor", row.floor}};
  });
}

void nonlinear_study(const Scenario& s, const StudyOptions& opt, ConvergenceReport& rep) {
  const NonlinearOperator F = s.op();
  const BoxGrid eff = s.effective_grid();
  NonlinearCell cell(F, s.cell_grid(), nonlinear_cell_options(s));
  auto cache = std::make_shared<EffectiveCache>();
  EffectiveOperator F_bar(cell, cache);
  NewtonReport eff_report;
  GridField u = solve_effective_nl(F_bar, sample_box(eff, s.g), {1e-9, 60, 30, false}, &eff_report);
  GridField u_coarse = solve_effective_nl(F_bar, sample_box(half_grid(eff), s.g));
  const double eff_floor = effective_floor(u, u_coarse);

  rep.tensors = nonlinear_table(cell, s);
  rep.summary["effective_residual"] = eff_report.residual;
  rep.summary["effective_iterations"] = eff_report.iterations;
  rep.summary["u_sup"] = sup_norm(u);
  rep.summary["effective_floor"] = eff_floor;

  std::map<int, std::shared_ptr<NonlinearHierarchy>> by_depth;
  std::map<int, std::shared_ptr<NonlinearHierarchy>> hierarchy;
  nlohmann::json levels = nlohmann::json::array();
  for (int m : s.orders) {
    int depth = m / 2 + 1;
    if (!by_depth.count(depth)) {
      NonlinearHierarchyOptions ho;
      ho.m = m;
      auto h = std::make_shared<NonlinearHierarchy>(build_hierarchy(F_bar, u, ho));
      nlohmann::json w = nlohmann::json::array();
      for (int k = 1; k < int(h->w.size()); ++k) w.push_back(sup_norm(h->w[k].values()));
      nlohmann::json level = {{"depth", depth},
                              {"w_sup", w},
                              {"w2_cell_residual", h->w2_cell_residual},
                              {"x0_residual", h->x0_residual}};
      if (depth >= 3) {
        level["Psi1_sup"] = sup_norm(h->Psi1);
        level["psi1_sup"] = sup_norm(h->psi1);
        level["w3_cell_residual"] = h->w3_cell_residual;
        level["psi1_residual"] = h->psi1_residual;
      }
      levels.push_back(level);
      by_depth[depth] = h;
    }
    hierarchy[m] = by_depth[depth];
  }
  rep.summary["hierarchy"] = levels;
  rep.summary["cache"] = {{"entries", cache->size()}, {"hits", cache->hits()}, {"misses", cache->misses()}};

  run_rows(rep.rows, opt.workers, [&](StudyRow& row) {
    auto r = assemble_expansion_nl(F, *hierarchy.at(row.m), s.g, row.eps, s.points_per_period,
                                   s.min_points_per_period);
    row.error_sup = r.error_sup;
    row.theta_sup = r.theta_sup;
    row.residual_sup = r.taylor.sup;
    row.floor = row_floor(eff_floor, eff, s, row.eps);
    row.details = {{"C0", r.C0},
                   {"taylor",
                    {{"sup", r.taylor.sup},
                     {"scaled", r.taylor.scaled},
                     {"consistency", r.taylor.consistency},
                     {"discrete_gap", r.taylor.discrete_gap},
                     {"Y_bound", r.taylor.Y_bound}}},
                   {"barrier",
                    {{"bound", r.barrier.bound},
                     {"slack", r.barrier.slack},
                     {"worst_violation", r.barrier.worst_violation},
                     {"violations", r.barrier.violations},
                     {"passed", r.barrier.passed}}},
                   {"u_eps_iterations", r.u_eps_iterations},
                   {"nodes", r.u_eps.nodes()},
                   {"floor", row.floor}};
  });
}

}  // namespace

bool ConvergenceReport::all_failed() const {
  return std::none_of(rows.begin(), rows.end(), [](const StudyRow& r) { return r.ok; });
}

double expected_rate(const std::string& kind, int m) { return kind == "linear" ? m - 1 : m / 2; }

double fit_slope(const std::vector<std::pair<double, double>>& eps_error) {
  std::vector<std::pair<double, double>> pts;
  for (auto [e, err] : eps_error)
    if (e > 0.0 && err > 0.0 && std::isfinite(err)) pts.emplace_back(std::log(e), std::log(err));
  if (pts.size() < 3) throw Error("slope fit needs at least 3 rows with positive errors");
  double mx = 0.0, my = 0.0;
  for (auto [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= double(pts.size());
  my /= double(pts.size());
  double sxx = 0.0, sxy = 0.0;
  for (auto [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0) throw Error("slope fit needs distinct eps values");
  return sxy / sxx;
}

double fit_slope(const std::vector<StudyRow>& rows) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows)
    if (r.ok) pts.emplace_back(r.eps, r.error_sup);
  return fit_slope(pts);
}

ConvergenceReport run_convergence_study(const Scenario& s, const StudyOptions& opt) {
  ConvergenceReport rep;
  rep.scenario = s.name;
  rep.kind = s.kind_name();
  if (!opt.setup_only) {
    for (int m : s.orders)
      for (double eps : s.eps)
        if (!opt.only_eps || std::abs(*opt.only_eps - eps) <= 1e-12 * eps) rep.rows.push_back(blank_row(s, m, eps));
    if (opt.only_eps && rep.rows.empty())
      for (int m : s.orders) rep.rows.push_back(blank_row(s, m, *opt.only_eps));
  }

  try {
    if (s.kind == ScenarioKind::Linear) linear_study(s, opt, rep);
    else nonlinear_study(s, opt, rep);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    if (opt.setup_only) throw;
    fail_all(rep.rows, std::string("setup failed: ") + e.what());
  }
  if (opt.setup_only) return rep;

  for (int m : s.orders) {
    SlopeFit fit;
    fit.m = m;
    fit.expected = expected_rate(rep.kind, m);
    std::vector<StudyRow> rows;
    for (const auto& r : rep.rows)
      if (r.m == m) rows.push_back(r);
    try {
      fit.slope = fit_slope(rows);
      bool floor = std::all_of(rows.begin(), rows.end(),
                               [](const StudyRow& r) { return r.ok && r.error_sup <= 10.0 * r.floor; });
      fit.status = floor ? "floor-limited" : "ok";
    } catch (const Error&) {
      fit.status = "insufficient rows";
    }
    rep.slopes.push_back(fit);
  }
  return rep;
}

std::vector<Check> assert_report(const ConvergenceReport& rep) {
  std::vector<Check> out;
  char buf[256];
  for (const auto& r : rep.rows)
    if (!r.ok) {
      std::snprintf(buf, sizeof buf, "m=%d eps=%.6g: ", r.m, r.eps);
      out.push_back({rep.scenario + " row", false, buf + r.diagnostic});
    }
  for (const auto& fit : rep.slopes) {
    Check c;
    c.name = rep.scenario + " slope m=" + std::to_string(fit.m);
    if (fit.status == "floor-limited") {
      c.passed = true;
      c.detail = "floor-limited";
    } else if (fit.slope) {
      c.passed = *fit.slope >= fit.expected - 0.3;
      std::snprintf(buf, sizeof buf, "slope %.3f, predicted %.0f, threshold %.2f", *fit.slope, fit.expected,
                    fit.expected - 0.3);
      c.detail = buf;
    } else {
      c.detail = fit.status;
    }
    out.push_back(c);

    if (fit.status == "floor-limited") continue;
    Check mono{rep.scenario + " monotone m=" + std::to_string(fit.m), true, "errors decrease below eps = 1/8"};
    const StudyRow* prev = nullptr;
    for (const auto& r : rep.rows) {
      if (r.m != fit.m || !r.ok) continue;
      if (prev && r.eps < 0.125 && !(r.error_sup < prev->error_sup)) {
        mono.passed = false;
        std::snprintf(buf, sizeof buf, "error %.3e at eps=%.6g not below %.3e at eps=%.6g", r.error_sup, r.eps,
                      prev->error_sup, prev->eps);
        mono.detail = buf;
      }
      prev = &r;
    }
    out.push_back(mono);
  }
  if (rep.kind == "nonlinear") {
    Check c{rep.scenario + " barrier", true, "bracket holds at every node"};
    for (const auto& r : rep.rows)
      if (r.ok && !r.details.value("/barrier/passed"_json_pointer, false)) {
        c.passed = false;
        std::snprintf(buf, sizeof buf, "m=%d eps=%.6g: %d violations", r.m, r.eps,
                      r.details.value("/barrier/violations"_json_pointer, 0));
        c.detail = buf;
      }
    out.push_back(c);
  } else {
    for (const auto& hi : rep.rows) {
      if (!hi.ok || hi.eps > 1.0 / 16 + 1e-15) continue;
      for (const auto& lo : rep.rows)
        if (lo.ok && lo.m == hi.m - 1 && lo.eps == hi.eps) {
          std::snprintf(buf, sizeof buf, "%s order m=%d vs m=%d at eps=%.6g", rep.scenario.c_str(), hi.m, lo.m,
                        hi.eps);
          Check c{buf, hi.error_sup <= lo.error_sup, ""};
          std::snprintf(buf, sizeof buf, "%.3e vs %.3e", hi.error_sup, lo.error_sup);
          c.detail = buf;
          out.push_back(c);
        }
    }
  }
  return out;
}

nlohmann::json effective_table(const Scenario& s) {
  if (s.kind == ScenarioKind::Linear)
    return tensor_rows(chi_recursion(s.coefficient(), s.cell_grid(), s.orders.back(), cell_options(s)));
  const NonlinearOperator F = s.op();
  NonlinearCell cell(F, s.cell_grid(), nonlinear_cell_options(s));
  return nonlinear_table(cell, s);
}

std::vector<Check> verify_scenario(const Scenario& s) {
  std::vector<Check> out;
  char buf[256];
  std::mt19937 rng(20240607u);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto random_matrix = [&](double scale) {
    SymMatrix M = SymMatrix::Zero();
    M(0, 0) = scale * unit(rng);
    if (s.dim == 2) {
      M(1, 1) = scale * unit(rng);
      M(0, 1) = M(1, 0) = 0.5 * scale * unit(rng);
    }
    return M;
  };
  auto nonnegative_matrix = [&]() {
    SymMatrix B = random_matrix(1.0);
    SymMatrix N = B * B.transpose();
    if (s.dim == 1) N(0, 1) = N(1, 0) = N(1, 1) = 0.0;
    return N;
  };

  if (s.kind == ScenarioKind::Linear) {
    const CoefficientField A = s.coefficient();
    CellOptions opt = cell_options(s);
    EffectiveTensors t = chi_recursion(A, s.cell_grid(), std::max(3, s.orders.back()), opt);
    SymMatrix a_bar = t.a_bar_matrix();
    auto ev = eigenvalues(a_bar, s.dim);
    double tol = 1e-3;
    std::snprintf(buf, sizeof buf, "eig in [%.6f, %.6f], bounds [%.6f, %.6f]", ev[0], ev[s.dim - 1], A.lambda(),
                  A.Lambda());
    out.push_back({"a_bar ellipticity", ev[0] >= A.lambda() - tol && ev[s.dim - 1] <= A.Lambda() + tol, buf});

    double worst = 0.0;
    for (const auto& [idx, e] : t.entries()) worst = std::max(worst, e.residual);
    std::snprintf(buf, sizeof buf, "max cell residual %.2e", worst);
    out.push_back({"cell residuals", worst <= 1e-8, buf});

    CellOptions cross = opt;
    cross.cross_validate = true;
    double gap = 0.0;
    for (const auto& [k, l] : symmetric_directions(s.dim)) {
      auto sol = solve_cell_for_matrix(A, s.cell_grid(), unit_matrix(k, l), cross);
      gap = std::max(gap, sol.cross_check.value_or(0.0));
    }
    std::snprintf(buf, sizeof buf, "direct vs delta schedule %.2e", gap);
    out.push_back({"cell methods agree", gap <= 1e-6, buf});

    if (s.dim == 1) {
      double a3 = t.a_bar({0, 0, 0});
      std::snprintf(buf, sizeof buf, "a_bar_111 = %.2e", a3);
      out.push_back({"third-order identity", std::abs(a3) <= 1e-8, buf});
    }

    // First boundary corrector at the largest eps.
    StudyOptions one;
    one.only_eps = s.eps.front();
    Scenario single = s;
    single.orders = {s.orders.front()};
    auto rep = run_convergence_study(single, one);
    const auto& row = rep.rows.front();
    if (!row.ok) {
      out.push_back({"z_1 vanishes", false, row.diagnostic});
    } else {
      double z1 = row.details["z_sup"].empty() ? 0.0 : row.details["z_sup"][0].get<double>();
      std::snprintf(buf, sizeof buf, "sup |z_1| = %.2e at eps=%.6g", z1, row.eps);
      out.push_back({"z_1 vanishes", z1 <= 1e-9, buf});
    }
    return out;
  }

  const NonlinearOperator F = s.op();
  std::string first;
  int failures = F.audit(7u, 200, &first);
  out.push_back({"operator audit", failures == 0, failures == 0 ? "200 probes" : first});

  NonlinearCell cell(F, s.cell_grid(), nonlinear_cell_options(s));
  const Point x = center(s);
  auto Fbar = [&](const SymMatrix& M) { return cell.effective_F(M, x).F_bar; };

  int concave_fail = 0, ellipt_fail = 0;
  double worst_c = 0.0, worst_e = 0.0;
  for (int i = 0; i < 10; ++i) {
    SymMatrix M = random_matrix(2.0), N = random_matrix(2.0);
    double slack = 1e-6 * (1.0 + M.norm() + N.norm());
    double gap = 0.5 * (Fbar(M) + Fbar(N)) - Fbar(0.5 * (M + N));
    worst_c = std::max(worst_c, gap);
    if (gap > slack) ++concave_fail;
    SymMatrix P = nonnegative_matrix();
    double inc = Fbar(M + P) - Fbar(M);
    double tr = P.trace();
    double over = std::max(F.lambda() * tr - inc, inc - F.Lambda() * tr);
    worst_e = std::max(worst_e, over);
    if (over > 1e-6 * (1.0 + M.norm() + P.norm())) ++ellipt_fail;
  }
  std::snprintf(buf, sizeof buf, "10 probes, worst midpoint gap %.2e", worst_c);
  out.push_back({"F_bar concavity", concave_fail == 0, buf});
  std::snprintf(buf, sizeof buf, "10 probes, worst excess %.2e", worst_e);
  out.push_back({"F_bar ellipticity", ellipt_fail == 0, buf});

  if (F.smooth()) {
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
      SymMatrix M = random_matrix(1.0);
      auto smp = cell.sample(M, x);
      for (const auto& [k, l] : symmetric_directions(s.dim)) {
        const double h = 1e-3;
        SymMatrix E = unit_matrix(k, l);
        double fd = (Fbar(M + h * E) - Fbar(M - h * E)) / (2 * h);
        double lin = smp.dF_dp(k, l);
        worst = std::max(worst, std::abs(lin - fd) / std::max(1.0, std::abs(fd)));
      }
    }
    std::snprintf(buf, sizeof buf, "worst relative gap %.2e", worst);
    out.push_back({"F_bar_p consistency", worst <= 1e-4, buf});
  }

  NonlinearCellOptions cross = nonlinear_cell_options(s);
  cross.cross_validate = true;
  NonlinearCell checked(F, s.cell_grid(), cross);
  double gap = 0.0;
  for (int i = 0; i < 3; ++i) gap = std::max(gap, checked.effective_F(random_matrix(1.0), x).cross_check.value_or(0.0));
  std::snprintf(buf, sizeof buf, "direct vs delta schedule %.2e", gap);
  out.push_back({"cell methods agree", gap <= 1e-6, buf});
  return out;
}

}  // namespace homog
