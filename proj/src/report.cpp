#include "homog/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace homog {

namespace {

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9e", v);
  return buf;
}

}  // namespace

std::string report_csv(const std::vector<ConvergenceReport>& reports, bool timing) {
  std::string out = "scenario,kind,m,epsilon,error_sup,residual_sup,theta_sup,wall_ms\n";
  for (const auto& rep : reports)
    for (const auto& r : rep.rows) {
      out += r.scenario + "," + r.kind + "," + std::to_string(r.m) + "," + number(r.eps) + ",";
      if (r.ok) out += number(r.error_sup) + "," + number(r.residual_sup) + "," + number(r.theta_sup);
      else out += ",,";
      out += ",";
      if (timing) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.1f", r.wall_ms);
        out += buf;
      }
      out += "\n";
    }
  return out;
}

nlohmann::json report_json(const std::vector<ConvergenceReport>& reports, bool timing) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& rep : reports) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : rep.rows) {
      nlohmann::json row = {{"scenario", r.scenario}, {"kind", r.kind}, {"m", r.m}, {"epsilon", r.eps},
                            {"ok", r.ok}};
      if (r.ok) {
        row["error_sup"] = r.error_sup;
        row["residual_sup"] = r.residual_sup;
        row["theta_sup"] = r.theta_sup;
        row["diagnostics"] = r.details;
      } else {
        row["diagnostic"] = r.diagnostic;
      }
      row["wall_ms"] = timing ? nlohmann::json(r.wall_ms) : nlohmann::json(nullptr);
      rows.push_back(row);
    }
    nlohmann::json slopes = nlohmann::json::array();
    for (const auto& s : rep.slopes)
      slopes.push_back({{"m", s.m},
                        {"slope", s.slope ? nlohmann::json(*s.slope) : nlohmann::json(nullptr)},
                        {"status", s.status},
                        {"predicted", s.expected}});
    out.push_back({{"scenario", rep.scenario},
                   {"kind", rep.kind},
                   {"rows", rows},
                   {"slopes", slopes},
                   {"summary", rep.summary}});
  }
  return {{"reports", out}};
}

nlohmann::json tensors_json(const std::vector<ConvergenceReport>& reports) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& rep : reports) out.push_back({{"name", rep.scenario}, {"kind", rep.kind}, {"rows", rep.tensors}});
  return {{"scenarios", out}};
}

void write_text(const std::string& dir, const std::string& name, const std::string& text) {
  std::filesystem::create_directories(dir);
  auto path = std::filesystem::path(dir) / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

void write_reports(const std::string& dir, const std::vector<ConvergenceReport>& reports, bool timing) {
  write_text(dir, "report.csv", report_csv(reports, timing));
  write_text(dir, "report.json", report_json(reports, timing).dump(2) + "\n");
  write_text(dir, "tensors.json", tensors_json(reports).dump(2) + "\n");
}

}  // namespace homog
