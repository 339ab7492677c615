#include "fedsim/report.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

#include "fedsim/error.hpp"
#include "json_internal.hpp"

namespace fedsim {

namespace {

using nlohmann::json;

std::string shortest(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string signed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.4f", v);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string display_name(const std::string& name) {
  if (name.rfind("client_", 0) == 0) return "Client " + name.substr(7);
  if (name == "global") return "Global Model";
  if (name == "baseline") return "Non-private Model";
  return name;
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
  json j;
  j["format_version"] = report.format_version;
  j["config"] = detail::run_config_to_json(report.config);

  json rows = json::array();
  for (const ReportRow& row : report.rows) {
    json jr;
    jr["name"] = row.name;
    jr["accuracy"] = row.accuracy;
    jr["f1"] = row.f1;
    jr["dp_impact"] = row.dp_impact ? json(*row.dp_impact) : json(nullptr);
    jr["encryption_impact"] =
        row.encryption_identical ? json(*row.encryption_identical ? "identical" : "divergent")
                                 : json(nullptr);
    rows.push_back(std::move(jr));
  }
  j["rows"] = std::move(rows);

  json trajectory = json::array();
  for (const RoundRecord& rec : report.trajectory) {
    json jt;
    jt["round_index"] = rec.round_index;
    jt["global_accuracy"] = rec.global_accuracy;
    jt["global_f1"] = rec.global_f1;
    jt["dp_global_accuracy"] = rec.dp_global_accuracy;
    jt["dp_global_f1"] = rec.dp_global_f1;
    jt["weights"] = rec.weights;
    json per_client = json::array();
    for (const ClientRoundMetrics& pc : rec.per_client) {
      json jc;
      jc["client_id"] = pc.client_id;
      jc["accuracy"] = pc.accuracy;
      jc["f1"] = pc.f1;
      jc["model_bytes_len"] = pc.model_bytes_len;
      jc["token_len"] = pc.token_len;
      per_client.push_back(std::move(jc));
    }
    jt["per_client"] = std::move(per_client);
    trajectory.push_back(std::move(jt));
  }
  j["trajectory"] = std::move(trajectory);
  j["notes"] = report.notes;
  return j.dump(2) + "\n";
}

std::string render_table(const ExperimentReport& report) {
  constexpr std::size_t kName = 19;
  constexpr std::size_t kNum = 10;
  constexpr std::size_t kDp = 14;
  constexpr std::size_t kEnc = 20;

  std::string out;
  out += "Final evaluation on the held-out test split\n\n";
  out += pad_right("Model", kName) + pad_left("Accuracy", kNum) + pad_left("F1 Score", kNum) +
         pad_left("Impact of DP", kDp) + "  " + pad_right("Impact of Encryption", kEnc) + "\n";
  out += std::string(kName + kNum + kNum + kDp + 2 + kEnc, '-') + "\n";
  for (const ReportRow& row : report.rows) {
    std::string dp = row.dp_impact ? signed4(*row.dp_impact) : "N/A";
    std::string enc = row.encryption_identical
                          ? (*row.encryption_identical ? "Minimal" : "Divergent")
                          : "N/A";
    out += pad_right(display_name(row.name), kName) + pad_left(fixed4(row.accuracy), kNum) +
           pad_left(fixed4(row.f1), kNum) + pad_left(dp, kDp) + "  " + pad_right(enc, kEnc) +
           "\n";
  }
  out += "\n";
  const RunConfig& cfg = report.config;
  out += "seed=" + std::to_string(cfg.fed.master_seed) +
         "  clients=" + std::to_string(cfg.fed.k_clients) +
         "  rounds=" + std::to_string(cfg.fed.rounds) + "  epsilon=" + shortest(cfg.fed.dp.epsilon) +
         "  mechanism=" + std::string(to_string(cfg.fed.dp.mechanism)) +
         "  encryption=" + (cfg.fed.encryption_enabled ? "on" : "off") + "\n";
  for (const std::string& note : report.notes) {
    out += "note: " + note + "\n";
  }
  return out;
}

std::string trajectory_to_csv(const ExperimentReport& report) {
  std::string out = "round,model,dp_flag,accuracy,f1\n";
  for (const RoundRecord& rec : report.trajectory) {
    const std::string round = std::to_string(rec.round_index);
    for (const ClientRoundMetrics& pc : rec.per_client) {
      out += round + "," + std::to_string(pc.client_id) + ",0," + shortest(pc.accuracy) + "," +
             shortest(pc.f1) + "\n";
    }
    out += round + ",global,0," + shortest(rec.global_accuracy) + "," + shortest(rec.global_f1) +
           "\n";
    out += round + ",global,1," + shortest(rec.dp_global_accuracy) + "," +
           shortest(rec.dp_global_f1) + "\n";
  }
  return out;
}

void write_report_files(const ExperimentReport& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    raise(ErrorCode::invalid_config,
          "cannot create output directory '" + out_dir.string() + "': " + ec.message());
  }
  auto write = [&](const char* filename, const std::string& content) {
    std::ofstream out(out_dir / filename, std::ios::binary);
    if (!out) {
      raise(ErrorCode::invalid_config, "cannot write '" + (out_dir / filename).string() + "'");
    }
    out << content;
    if (!out) {
      raise(ErrorCode::invalid_config, "write failed for '" + (out_dir / filename).string() + "'");
    }
  };
  write("report.json", report_to_json(report));
  write("table.txt", render_table(report));
  write("trajectory.csv", trajectory_to_csv(report));
}

}  // namespace fedsim
