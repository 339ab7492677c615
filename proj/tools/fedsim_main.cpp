// fedsim: deterministic federated training simulator for the Pima diabetes
// task, with encrypted model updates and differentially private predictions.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "fedsim/dataset.hpp"
#include "fedsim/error.hpp"
#include "fedsim/fernet.hpp"
#include "fedsim/report.hpp"
#include "fedsim/rng.hpp"
#include "fedsim/run_config.hpp"

namespace {

using fedsim::Error;
using fedsim::ErrorCode;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_config:
    case ErrorCode::invalid_hyper:
    case ErrorCode::invalid_epsilon:
      return 2;
    case ErrorCode::missing_file:
    case ErrorCode::schema_mismatch:
    case ErrorCode::parse_error:
    case ErrorCode::empty_data:
    case ErrorCode::degenerate_split:
    case ErrorCode::too_few_rows:
    case ErrorCode::dimension_mismatch:
    case ErrorCode::too_few_minority:
    case ErrorCode::single_class:
    case ErrorCode::length_mismatch:
    case ErrorCode::empty_input:
      return 3;
    case ErrorCode::invalid_key:
    case ErrorCode::invalid_token:
    case ErrorCode::invalid_signature:
    case ErrorCode::expired_token:
    case ErrorCode::invalid_padding:
    case ErrorCode::crypto_failure:
      return 4;
    case ErrorCode::single_class_init:
    case ErrorCode::malformed_model:
    case ErrorCode::training_failure:
    case ErrorCode::all_zero_mass:
    case ErrorCode::invalid_score:
      return 5;
  }
  return 1;
}

const char* stage_for(int exit_code) {
  switch (exit_code) {
    case 2: return "config";
    case 3: return "data";
    case 4: return "crypto";
    case 5: return "train";
    default: return "internal";
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fedsim::raise(ErrorCode::missing_file, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fedsim::raise(ErrorCode::invalid_config, "cannot write '" + path + "'");
  out << content;
  if (!out) fedsim::raise(ErrorCode::invalid_config, "write failed for '" + path + "'");
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

fedsim::SecretKey load_key(const std::string& path) {
  return fedsim::SecretKey::from_external(trim(read_file(path)));
}

fedsim::SecretKey random_key() {
  std::random_device rd;
  fedsim::SecretKey key;
  auto fill = [&rd](std::span<std::uint8_t> out) {
    std::uniform_int_distribution<int> byte(0, 255);
    for (auto& b : out) b = static_cast<std::uint8_t>(byte(rd));
  };
  fill(key.signing_key);
  fill(key.encryption_key);
  return key;
}

const char* kFetchInstructions =
    "The experiment expects the Pima Indians Diabetes dataset as a CSV with\n"
    "the header:\n"
    "  Pregnancies,Glucose,BloodPressure,SkinThickness,Insulin,BMI,"
    "DiabetesPedigreeFunction,Age,Outcome\n"
    "(768 data rows; Outcome is 0 or 1 with 500 negatives / 268 positives).\n"
    "\n"
    "Ways to obtain it:\n"
    "  * tools/get_pima.py <output.csv>   (tries common mirrors and the\n"
    "    'imbalanced_databases' python package, then validates the counts)\n"
    "  * https://raw.githubusercontent.com/jbrownlee/Datasets/master/pima-indians-diabetes.csv\n"
    "    (headerless; prepend the header line above)\n"
    "  * Kaggle: 'Pima Indians Diabetes Database' (uciml/pima-indians-diabetes)\n"
    "\n"
    "Point dataset_path in your run config at the resulting file.\n";

struct RunArgs {
  std::string config_path;
  fedsim::CliOverrides overrides;
};

int cmd_run(const RunArgs& args) {
  fedsim::RunConfig cfg = fedsim::load_run_config(args.config_path);
  fedsim::apply_overrides(cfg, args.overrides);
  fedsim::ExperimentReport report = fedsim::run_experiment(cfg);
  fedsim::write_report_files(report, cfg.output_dir);
  std::cout << fedsim::render_table(report);
  std::cout << "\noutputs: " << cfg.output_dir << "/report.json, " << cfg.output_dir
            << "/table.txt, " << cfg.output_dir << "/trajectory.csv\n";
  return 0;
}

int cmd_split(const RunArgs& args) {
  fedsim::RunConfig cfg = fedsim::load_run_config(args.config_path);
  fedsim::apply_overrides(cfg, args.overrides);

  fedsim::Dataset full = fedsim::load_csv(cfg.dataset_path, fedsim::pima_schema());
  auto [train, test] = fedsim::stratified_holdout(full, cfg.test_fraction, cfg.fed.master_seed);
  auto shards = fedsim::partition_clients(train, cfg.fed.k_clients, cfg.fed.master_seed);

  nlohmann::json j;
  j["format_version"] = 1;
  j["master_seed"] = cfg.fed.master_seed;
  j["test_fraction"] = cfg.test_fraction;
  j["k_clients"] = cfg.fed.k_clients;
  j["n_rows_total"] = full.n_rows();
  j["test_row_ids"] = test.row_ids;
  nlohmann::json clients = nlohmann::json::array();
  for (const auto& shard : shards) {
    nlohmann::json jc;
    jc["client_id"] = shard.client_id;
    jc["row_ids"] = shard.data.row_ids;
    jc["n_rows"] = shard.data.n_rows();
    jc["n_positive"] = shard.data.count_label(1);
    jc["n_negative"] = shard.data.count_label(0);
    clients.push_back(std::move(jc));
  }
  j["clients"] = std::move(clients);

  std::filesystem::path out_dir(cfg.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    fedsim::raise(ErrorCode::invalid_config, "cannot create output directory '" +
                                                 out_dir.string() + "': " + ec.message());
  }
  write_file((out_dir / "partitions.json").string(), j.dump(2) + "\n");

  std::cout << "train=" << train.n_rows() << " test=" << test.n_rows() << "\n";
  for (const auto& shard : shards) {
    std::cout << "client " << shard.client_id << ": " << shard.data.n_rows() << " rows ("
              << shard.data.count_label(1) << " positive)\n";
  }
  std::cout << "outputs: " << (out_dir / "partitions.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic federated diabetes-prediction experiment"};
  app.require_subcommand(0, 1);
  bool fetch_instructions = false;
  app.add_flag("--fetch-instructions", fetch_instructions,
               "Explain how to obtain the Pima diabetes CSV and exit");

  RunArgs run_args;
  std::string mechanism;
  std::string out_dir;
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  int rounds = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", run_args.config_path, "Run configuration JSON")
        ->required();
    auto* seed_opt = cmd->add_option("--seed", seed, "Override master_seed");
    auto* out_opt = cmd->add_option("--out", out_dir, "Override output_dir");
    return std::pair(seed_opt, out_opt);
  };

  CLI::App* run_cmd = app.add_subcommand("run", "Run the full federated experiment");
  auto [run_seed_opt, run_out_opt] = add_common(run_cmd);
  auto* eps_opt = run_cmd->add_option("--epsilon", epsilon, "Override dp.epsilon");
  auto* rounds_opt = run_cmd->add_option("--rounds", rounds, "Override rounds");
  auto* mech_opt = run_cmd->add_option("--mechanism", mechanism,
                                       "Override dp.mechanism "
                                       "(randomized_response|laplace_score)");
  bool no_encryption = false;
  bool serial = false;
  run_cmd->add_flag("--no-encryption", no_encryption, "Ship model updates in the clear");
  run_cmd->add_flag("--serial", serial, "Train clients one after another");

  CLI::App* split_cmd =
      app.add_subcommand("split", "Materialize the holdout and client partition assignment");
  auto [split_seed_opt, split_out_opt] = add_common(split_cmd);

  CLI::App* keygen_cmd = app.add_subcommand("keygen", "Generate an encryption key");
  std::string key_out;
  bool keygen_seeded = false;
  std::uint64_t keygen_seed = 0;
  auto* keygen_seed_opt =
      keygen_cmd->add_option("--seed", keygen_seed, "Derive the key deterministically");
  keygen_cmd->add_option("--out", key_out, "Write the key here instead of stdout");

  CLI::App* encrypt_cmd = app.add_subcommand("encrypt", "Wrap a file in an encrypted token");
  std::string enc_key_path, enc_in, enc_out;
  encrypt_cmd->add_option("--key", enc_key_path, "Key file")->required();
  encrypt_cmd->add_option("--in", enc_in, "Plaintext input file")->required();
  encrypt_cmd->add_option("--out", enc_out, "Token output file")->required();

  CLI::App* decrypt_cmd = app.add_subcommand("decrypt", "Verify and unwrap an encrypted token");
  std::string dec_key_path, dec_in, dec_out;
  std::uint64_t ttl = 0;
  decrypt_cmd->add_option("--key", dec_key_path, "Key file")->required();
  decrypt_cmd->add_option("--in", dec_in, "Token input file")->required();
  decrypt_cmd->add_option("--out", dec_out, "Plaintext output file")->required();
  auto* ttl_opt = decrypt_cmd->add_option("--ttl", ttl, "Reject tokens older than this many seconds");

  try {
    app.parse(argc, argv);

    if (fetch_instructions) {
      std::cout << kFetchInstructions;
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cout << app.help();
      return 0;
    }

    if (app.got_subcommand(run_cmd) || app.got_subcommand(split_cmd)) {
      const bool is_run = app.got_subcommand(run_cmd);
      auto* seed_opt = is_run ? run_seed_opt : split_seed_opt;
      auto* out_opt = is_run ? run_out_opt : split_out_opt;
      if (const char* env = std::getenv("FEDSIM_OUTPUT_DIR")) {
        run_args.overrides.env_output_dir = std::string(env);
      }
      if (seed_opt->count() > 0) run_args.overrides.seed = seed;
      if (out_opt->count() > 0) run_args.overrides.output_dir = out_dir;
      if (is_run) {
        if (eps_opt->count() > 0) run_args.overrides.epsilon = epsilon;
        if (rounds_opt->count() > 0) run_args.overrides.rounds = rounds;
        if (mech_opt->count() > 0) run_args.overrides.mechanism = mechanism;
        run_args.overrides.no_encryption = no_encryption;
        run_args.overrides.serial = serial;
        return cmd_run(run_args);
      }
      return cmd_split(run_args);
    }

    if (app.got_subcommand(keygen_cmd)) {
      keygen_seeded = keygen_seed_opt->count() > 0;
      fedsim::SecretKey key;
      if (keygen_seeded) {
        fedsim::RngStream rng = fedsim::RngStream::derive(keygen_seed, "keygen", 0);
        key = fedsim::generate_key(rng);
      } else {
        key = random_key();
      }
      std::string encoded = key.external() + "\n";
      if (key_out.empty()) {
        std::cout << encoded;
      } else {
        write_file(key_out, encoded);
      }
      return 0;
    }

    if (app.got_subcommand(encrypt_cmd)) {
      fedsim::SecretKey key = load_key(enc_key_path);
      std::string plain = read_file(enc_in);
      std::array<std::uint8_t, 16> iv{};
      std::random_device rd;
      std::uniform_int_distribution<int> byte(0, 255);
      for (auto& b : iv) b = static_cast<std::uint8_t>(byte(rd));
      std::string token = fedsim::encrypt(
          key, std::span(reinterpret_cast<const std::uint8_t*>(plain.data()), plain.size()),
          static_cast<std::uint64_t>(std::time(nullptr)), iv);
      write_file(enc_out, token + "\n");
      return 0;
    }

    if (app.got_subcommand(decrypt_cmd)) {
      fedsim::SecretKey key = load_key(dec_key_path);
      std::string token = trim(read_file(dec_in));
      std::optional<std::uint64_t> ttl_arg;
      if (ttl_opt->count() > 0) ttl_arg = ttl;
      auto plain =
          fedsim::decrypt(key, token, ttl_arg, static_cast<std::uint64_t>(std::time(nullptr)));
      write_file(dec_out, std::string(plain.begin(), plain.end()));
      return 0;
    }

    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "fedsim: config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    int code = exit_code_for(e.code());
    std::cerr << "fedsim: " << stage_for(code) << " error: " << e.what() << "\n";
    return code;
  } catch (const std::exception& e) {
    std::cerr << "fedsim: internal error: " << e.what() << "\n";
    return 1;
  }
}
