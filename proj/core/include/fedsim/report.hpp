#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fedsim/federation.hpp"
#include "fedsim/run_config.hpp"

namespace fedsim {

struct ReportRow {
  std::string name;  // "client_0".."client_{k-1}", "global", "baseline"
  double accuracy = 0.0;
  double f1 = 0.0;
  // dp_accuracy - accuracy for the final model; absent where the privacy
  // mechanism is out of scope (the non-private baseline).
  std::optional<double> dp_impact;
  // Whether every decrypted update matched the sent bytes; absent when
  // encryption was disabled or not involved (the baseline).
  std::optional<bool> encryption_identical;
  bool f1_is_degenerate = false;  // the 0/0 convention fired for this row
};

struct ExperimentReport {
  int format_version = 1;
  RunConfig config;
  std::vector<ReportRow> rows;  // k clients, then global, then baseline
  std::vector<RoundRecord> trajectory;
  std::vector<std::string> notes;
};

// Full pipeline: load, hold out, federate for cfg.fed.rounds rounds, then
// assemble final rows plus a non-federated baseline trained on the pooled
// training split.
ExperimentReport run_experiment(const RunConfig& cfg);
ExperimentReport run_experiment(const RunConfig& cfg, const std::vector<std::string>& schema);

// Deterministic renderings; bytes depend only on the report contents.
std::string report_to_json(const ExperimentReport& report);
std::string render_table(const ExperimentReport& report);
std::string trajectory_to_csv(const ExperimentReport& report);

// Writes report.json, table.txt and trajectory.csv under out_dir.
void write_report_files(const ExperimentReport& report, const std::filesystem::path& out_dir);

}  // namespace fedsim
