#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "skillchair/evaluator.hpp"

namespace skillchair {

nlohmann::json report_to_json(const EvalReport& report);

/// Writes report.json, auc_table.csv, roc_curve.csv, importance.csv and
/// correlations.csv into `dir` (created if needed).
void write_report(const EvalReport& report, const std::filesystem::path& dir);

/// Renders roc.svg and importance.svg from a report.json document.
void render_report_svgs(const nlohmann::json& report, const std::filesystem::path& dir);

/// Fixed-width "Method | AUC, mean | AUC, std" table.
std::string format_auc_table(const nlohmann::json& report);

std::string roc_svg(const nlohmann::json& roc_points, const std::string& title);
std::string importance_svg(const nlohmann::json& importance);

}  // namespace skillchair
