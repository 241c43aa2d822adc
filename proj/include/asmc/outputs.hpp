#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "asmc/harness.hpp"

namespace asmc {

/// Output schema version written into every JSON document.
inline constexpr int kSchemaVersion = 1;

nlohmann::json report_json(const RunReport& report);
nlohmann::json summary_json(const RobustnessSummary& summary);
nlohmann::json folds_json(const FoldReport& folds);
nlohmann::json diagnose_json(const DiagnoseReport& diag, const std::string& config_hash);

/// Writes report.json, ranked_pairs.csv, binding_trajectory.csv, stability_heatmap.csv and
/// robustness_summary.csv (one row for the run). Throws StageError("output") when the
/// directory cannot be written.
void emit_outputs(const RunReport& report, const std::filesystem::path& out_dir);
/// Writes robustness.json and robustness_summary.csv.
void emit_outputs(const RobustnessSummary& summary, const std::filesystem::path& out_dir);
void emit_outputs(const FoldReport& folds, const std::filesystem::path& out_dir);

void write_json(const nlohmann::json& doc, const std::filesystem::path& path);

} // namespace asmc
