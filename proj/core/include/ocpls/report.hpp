#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "ocpls/sim.hpp"

namespace ocpls {

/// Writes rounds.csv (one row per RoundRecord, ordered by run then t) and
/// summary.json into out_dir. Returns the directory written to.
std::filesystem::path write_run_artifacts(const ExperimentConfig& cfg,
                                          const std::vector<std::vector<RoundRecord>>& episodes,
                                          const RunSummary& summary,
                                          const std::filesystem::path& out_dir,
                                          double runtime_seconds);

nlohmann::json summary_to_json(const ExperimentConfig& cfg, const RunSummary& summary,
                               double runtime_seconds);

std::string round_csv_header();
std::string round_csv_row(const RoundRecord& rec);

std::vector<RoundRecord> read_round_csv(const std::filesystem::path& path);

struct ComparisonEntry {
  std::string label;
  ExperimentConfig cfg;
  RunSummary summary;
};

/// Aligned per-round means for each entry plus headline numbers, including
/// the feedback-reduction ratio of ocp-pls against full feedback when both
/// modes are present. All entries must share T.
nlohmann::json comparison_json(const std::vector<ComparisonEntry>& entries);
void write_comparison_csv(const std::filesystem::path& path,
                          const std::vector<ComparisonEntry>& entries);

/// Reads a run directory produced by write_run_artifacts and emits the tidy
/// long-format plot table (series,t,value): per-round coverage, log-volume
/// and cumulative feedback means, the coverage target 1-alpha, the bound
/// curves (1-alpha) +/- C/t, and budget-change marker rows for piecewise
/// schedules. Throws IoError when artifacts are missing.
void write_plotdata(const std::filesystem::path& run_dir,
                    const std::filesystem::path& out_path);

}  // namespace ocpls
