#include "fedsim/run_config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "fedsim/error.hpp"
#include "json_internal.hpp"

namespace fedsim {

namespace {

using nlohmann::json;

[[noreturn]] void bad_config(const std::string& detail) {
  raise(ErrorCode::invalid_config, detail);
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& prefix) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (key == k) {
        known = true;
        break;
      }
    }
    if (!known) bad_config("unknown config field '" + prefix + key + "'");
  }
}

template <typename T>
void read_int(const json& obj, const char* key, const std::string& prefix, T& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) {
    bad_config("config field '" + prefix + key + "' must be an integer");
  }
  auto wide = v.get<std::int64_t>();
  if (wide < static_cast<std::int64_t>(std::numeric_limits<T>::min()) ||
      wide > static_cast<std::int64_t>(std::numeric_limits<T>::max())) {
    bad_config("config field '" + prefix + key + "' is out of range");
  }
  out = static_cast<T>(wide);
}

void read_u64(const json& obj, const char* key, const std::string& prefix, std::uint64_t& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    bad_config("config field '" + prefix + key + "' must be a non-negative integer");
  }
  out = v.get<std::uint64_t>();
}

void read_real(const json& obj, const char* key, const std::string& prefix, double& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number()) bad_config("config field '" + prefix + key + "' must be a number");
  double d = v.get<double>();
  if (!std::isfinite(d)) bad_config("config field '" + prefix + key + "' must be finite");
  out = d;
}

void read_bool(const json& obj, const char* key, const std::string& prefix, bool& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_boolean()) bad_config("config field '" + prefix + key + "' must be a boolean");
  out = v.get<bool>();
}

void read_string(const json& obj, const char* key, const std::string& prefix, std::string& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_string()) bad_config("config field '" + prefix + key + "' must be a string");
  out = v.get<std::string>();
}

}  // namespace

void RunConfig::validate() const {
  if (schema_version != 1) {
    bad_config("unsupported schema_version " + std::to_string(schema_version));
  }
  if (dataset_path.empty()) bad_config("dataset_path is required");
  if (!(test_fraction >= 0.0) || test_fraction >= 1.0) {
    bad_config("test_fraction must lie in [0, 1)");
  }
  if (output_dir.empty()) bad_config("output_dir must not be empty");
  fed.validate();
}

RunConfig parse_run_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    bad_config(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) bad_config("config top level must be an object");

  reject_unknown(doc,
                 {"schema_version", "dataset_path", "test_fraction", "k_clients", "rounds",
                  "master_seed", "smote", "gbdt", "dp", "encryption_enabled",
                  "decision_threshold", "output_dir"},
                 "");

  RunConfig cfg;
  read_int(doc, "schema_version", "", cfg.schema_version);
  read_string(doc, "dataset_path", "", cfg.dataset_path);
  read_real(doc, "test_fraction", "", cfg.test_fraction);
  read_int(doc, "k_clients", "", cfg.fed.k_clients);
  read_int(doc, "rounds", "", cfg.fed.rounds);
  read_u64(doc, "master_seed", "", cfg.fed.master_seed);
  read_bool(doc, "encryption_enabled", "", cfg.fed.encryption_enabled);
  read_real(doc, "decision_threshold", "", cfg.fed.decision_threshold);
  read_string(doc, "output_dir", "", cfg.output_dir);

  if (doc.contains("smote")) {
    const json& s = doc.at("smote");
    if (!s.is_object()) bad_config("config field 'smote' must be an object");
    reject_unknown(s, {"k_neighbors", "target_ratio"}, "smote.");
    read_int(s, "k_neighbors", "smote.", cfg.fed.smote.k_neighbors);
    read_real(s, "target_ratio", "smote.", cfg.fed.smote.target_ratio);
  }
  if (doc.contains("gbdt")) {
    const json& g = doc.at("gbdt");
    if (!g.is_object()) bad_config("config field 'gbdt' must be an object");
    reject_unknown(g, {"trees_total", "max_depth", "learning_rate", "lambda_reg",
                       "min_child_weight"},
                   "gbdt.");
    read_int(g, "trees_total", "gbdt.", cfg.fed.gbdt.trees_total);
    read_int(g, "max_depth", "gbdt.", cfg.fed.gbdt.max_depth);
    read_real(g, "learning_rate", "gbdt.", cfg.fed.gbdt.learning_rate);
    read_real(g, "lambda_reg", "gbdt.", cfg.fed.gbdt.lambda_reg);
    read_real(g, "min_child_weight", "gbdt.", cfg.fed.gbdt.min_child_weight);
  }
  if (doc.contains("dp")) {
    const json& d = doc.at("dp");
    if (!d.is_object()) bad_config("config field 'dp' must be an object");
    reject_unknown(d, {"mechanism", "epsilon"}, "dp.");
    read_real(d, "epsilon", "dp.", cfg.fed.dp.epsilon);
    std::string mechanism;
    read_string(d, "mechanism", "dp.", mechanism);
    if (!mechanism.empty()) cfg.fed.dp.mechanism = dp_mechanism_from_string(mechanism);
  }

  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::invalid_config, "cannot open config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

void apply_overrides(RunConfig& cfg, const CliOverrides& overrides) {
  if (overrides.env_output_dir) cfg.output_dir = *overrides.env_output_dir;
  if (overrides.seed) cfg.fed.master_seed = *overrides.seed;
  if (overrides.epsilon) cfg.fed.dp.epsilon = *overrides.epsilon;
  if (overrides.rounds) cfg.fed.rounds = *overrides.rounds;
  if (overrides.mechanism) cfg.fed.dp.mechanism = dp_mechanism_from_string(*overrides.mechanism);
  if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;
  if (overrides.no_encryption) cfg.fed.encryption_enabled = false;
  if (overrides.serial) cfg.fed.parallel_clients = false;
  cfg.validate();
}

namespace detail {

nlohmann::json run_config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["schema_version"] = cfg.schema_version;
  j["dataset_path"] = cfg.dataset_path;
  j["test_fraction"] = cfg.test_fraction;
  j["k_clients"] = cfg.fed.k_clients;
  j["rounds"] = cfg.fed.rounds;
  j["master_seed"] = cfg.fed.master_seed;
  j["smote"] = {{"k_neighbors", cfg.fed.smote.k_neighbors},
                {"target_ratio", cfg.fed.smote.target_ratio}};
  j["gbdt"] = {{"trees_total", cfg.fed.gbdt.trees_total},
               {"max_depth", cfg.fed.gbdt.max_depth},
               {"learning_rate", cfg.fed.gbdt.learning_rate},
               {"lambda_reg", cfg.fed.gbdt.lambda_reg},
               {"min_child_weight", cfg.fed.gbdt.min_child_weight}};
  j["dp"] = {{"mechanism", std::string(to_string(cfg.fed.dp.mechanism))},
             {"epsilon", cfg.fed.dp.epsilon}};
  j["encryption_enabled"] = cfg.fed.encryption_enabled;
  j["decision_threshold"] = cfg.fed.decision_threshold;
  j["output_dir"] = cfg.output_dir;
  return j;
}

}  // namespace detail

}  // namespace fedsim
