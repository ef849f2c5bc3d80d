#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "homog/study.hpp"

namespace homog {

/// Header: scenario,kind,m,epsilon,error_sup,residual_sup,theta_sup,wall_ms.
/// wall_ms stays empty unless `timing` is set, so repeated runs match byte for byte.
/// Failed rows leave the numeric fields empty.
std::string report_csv(const std::vector<ConvergenceReport>& reports, bool timing = false);

/// CSV fields per row plus slopes, summaries and per-row diagnostics.
nlohmann::json report_json(const std::vector<ConvergenceReport>& reports, bool timing = false);

/// {"scenarios": [{"name", "kind", "rows": [...]}]} from each report's tensor table.
nlohmann::json tensors_json(const std::vector<ConvergenceReport>& reports);

/// Writes report.csv, report.json and tensors.json into `dir` (created if missing).
void write_reports(const std::string& dir, const std::vector<ConvergenceReport>& reports, bool timing = false);

/// Writes `text` to dir/name, creating dir.
void write_text(const std::string& dir, const std::string& name, const std::string& text);

}  // namespace homog
