#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "fedsim/federation.hpp"

namespace fedsim {

// Everything a full experiment run needs. The JSON form is strict: unknown
// fields are rejected by name, absent fields take the defaults below.
struct RunConfig {
  int schema_version = 1;
  std::string dataset_path;
  double test_fraction = 0.2;
  std::string output_dir = "out";
  FederationConfig fed;

  void validate() const;
};

RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);

// Command-line / environment overrides, applied on top of the file config.
// Environment loses to explicit flags.
struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> epsilon;
  std::optional<int> rounds;
  std::optional<std::string> mechanism;
  std::optional<std::string> output_dir;      // --out
  std::optional<std::string> env_output_dir;  // FEDSIM_OUTPUT_DIR
  bool no_encryption = false;
  bool serial = false;
};

void apply_overrides(RunConfig& cfg, const CliOverrides& overrides);

}  // namespace fedsim
