#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "fedsim/dataset.hpp"
#include "fedsim/fernet.hpp"
#include "support/testutil.hpp"

using nlohmann::json;

namespace {

std::string cli_path() {
  const char* env = std::getenv("FEDSIM_CLI_PATH");
  REQUIRE_MESSAGE(env != nullptr, "FEDSIM_CLI_PATH must point at the fedsim binary");
  return env;
}

struct CmdResult {
  int code = -1;
  std::string out;
  std::string err;
};

CmdResult run_cli(const std::string& args, const std::filesystem::path& dir,
                  const std::string& env_prefix = "") {
  auto out_path = dir / "stdout.txt";
  auto err_path = dir / "stderr.txt";
  std::string cmd = env_prefix + "\"" + cli_path() + "\" " + args + " > \"" +
                    out_path.string() + "\" 2> \"" + err_path.string() + "\"";
  int status = std::system(cmd.c_str());
  CmdResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = testutil::read_file(out_path);
  r.err = testutil::read_file(err_path);
  return r;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

// Synthetic rows under the production CSV header; the loader checks names
// and label values, not feature semantics.
std::string write_dataset(const std::filesystem::path& dir) {
  fedsim::Dataset ds = testutil::make_blobs(150, 100, 8, 33);
  std::string text;
  const auto& schema = fedsim::pima_schema();
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (i) text += ",";
    text += schema[i];
  }
  text += "\n";
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    char buf[64];
    for (double v : ds.row(i)) {
      std::snprintf(buf, sizeof buf, "%.17g,", v);
      text += buf;
    }
    text += std::to_string(ds.labels[i]);
    text += "\n";
  }
  auto path = dir / "synthetic.csv";
  write_text(path, text);
  return path.string();
}

std::string write_config(const std::filesystem::path& dir, const std::string& dataset,
                         const std::string& out_dir, const std::string& extra = "") {
  std::string text = R"({
  "dataset_path": ")" + dataset + R"(",
  "rounds": 2,
  "gbdt": {"trees_total": 20},
  "output_dir": ")" + out_dir + "\"" + extra + "\n}\n";
  auto path = dir / "config.json";
  write_text(path, text);
  return path.string();
}

}  // namespace

TEST_CASE("help is offered with and without a subcommand") {
  testutil::TempDir tmp;
  CmdResult r = run_cli("--help", tmp.path());
  CHECK(r.code == 0);
  CHECK(r.out.find("run") != std::string::npos);
  CHECK(r.out.find("keygen") != std::string::npos);

  CmdResult bare = run_cli("", tmp.path());
  CHECK(bare.code == 0);
  CHECK(bare.out.find("Usage") != std::string::npos);
}

TEST_CASE("fetch instructions name the expected header") {
  testutil::TempDir tmp;
  CmdResult r = run_cli("--fetch-instructions", tmp.path());
  CHECK(r.code == 0);
  CHECK(r.out.find("Pregnancies,Glucose") != std::string::npos);
  CHECK(r.out.find("768 data rows") != std::string::npos);
}

TEST_CASE("run produces the three report files and is idempotent") {
  testutil::TempDir tmp;
  std::string dataset = write_dataset(tmp.path());
  std::string out_dir = (tmp.path() / "out").string();
  std::string config = write_config(tmp.path(), dataset, out_dir);

  CmdResult r = run_cli("run --config \"" + config + "\"", tmp.path());
  INFO("stderr: " << r.err);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("Global Model") != std::string::npos);
  CHECK(r.out.find("outputs: ") != std::string::npos);

  auto report_path = tmp.path() / "out" / "report.json";
  auto table_path = tmp.path() / "out" / "table.txt";
  auto csv_path = tmp.path() / "out" / "trajectory.csv";
  REQUIRE(std::filesystem::exists(report_path));
  REQUIRE(std::filesystem::exists(table_path));
  REQUIRE(std::filesystem::exists(csv_path));

  std::string first = testutil::read_file(report_path);
  std::string first_table = testutil::read_file(table_path);
  std::string first_csv = testutil::read_file(csv_path);

  CmdResult again = run_cli("run --config \"" + config + "\"", tmp.path());
  REQUIRE(again.code == 0);
  CHECK(testutil::read_file(report_path) == first);
  CHECK(testutil::read_file(table_path) == first_table);
  CHECK(testutil::read_file(csv_path) == first_csv);

  json doc = json::parse(first);
  CHECK(doc["rows"].size() == 5);
  CHECK(doc["config"]["rounds"] == 2);
}

TEST_CASE("seed, serial and encryption flags act as documented") {
  testutil::TempDir tmp;
  std::string dataset = write_dataset(tmp.path());
  std::string config =
      write_config(tmp.path(), dataset, (tmp.path() / "base").string());

  REQUIRE(run_cli("run --config \"" + config + "\"", tmp.path()).code == 0);
  std::string base = testutil::read_file(tmp.path() / "base" / "report.json");

  SUBCASE("--seed changes the outcome") {
    std::string out = (tmp.path() / "seeded").string();
    REQUIRE(run_cli("run --config \"" + config + "\" --seed 7 --out \"" + out + "\"",
                    tmp.path())
                .code == 0);
    std::string seeded = testutil::read_file(tmp.path() / "seeded" / "report.json");
    CHECK(seeded != base);
    CHECK(json::parse(seeded)["config"]["master_seed"] == 7);
  }
  SUBCASE("--serial changes nothing observable") {
    std::string out = (tmp.path() / "serial").string();
    REQUIRE(run_cli("run --config \"" + config + "\" --serial --out \"" + out + "\"",
                    tmp.path())
                .code == 0);
    json a = json::parse(base);
    json b = json::parse(testutil::read_file(tmp.path() / "serial" / "report.json"));
    // The config echo records the redirected output_dir; the results must not.
    CHECK(a["rows"] == b["rows"]);
    CHECK(a["trajectory"] == b["trajectory"]);
    CHECK(a["notes"] == b["notes"]);
    CHECK(testutil::read_file(tmp.path() / "serial" / "trajectory.csv") ==
          testutil::read_file(tmp.path() / "base" / "trajectory.csv"));
  }
  SUBCASE("--no-encryption keeps every metric, drops the transport check") {
    std::string out = (tmp.path() / "plain").string();
    REQUIRE(run_cli("run --config \"" + config + "\" --no-encryption --out \"" + out + "\"",
                    tmp.path())
                .code == 0);
    json enc = json::parse(base);
    json plain = json::parse(testutil::read_file(tmp.path() / "plain" / "report.json"));
    REQUIRE(plain["rows"].size() == enc["rows"].size());
    for (std::size_t i = 0; i < plain["rows"].size(); ++i) {
      CHECK(plain["rows"][i]["accuracy"] == enc["rows"][i]["accuracy"]);
      CHECK(plain["rows"][i]["f1"] == enc["rows"][i]["f1"]);
      CHECK(plain["rows"][i]["encryption_impact"].is_null());
    }
    CHECK(enc["rows"][0]["encryption_impact"] == "identical");
  }
  SUBCASE("FEDSIM_OUTPUT_DIR redirects, flags still win") {
    std::string env_dir = (tmp.path() / "env_out").string();
    REQUIRE(run_cli("run --config \"" + config + "\"", tmp.path(),
                    "FEDSIM_OUTPUT_DIR=\"" + env_dir + "\" ")
                .code == 0);
    CHECK(std::filesystem::exists(tmp.path() / "env_out" / "report.json"));

    std::string flag_dir = (tmp.path() / "flag_out").string();
    REQUIRE(run_cli("run --config \"" + config + "\" --out \"" + flag_dir + "\"",
                    tmp.path(), "FEDSIM_OUTPUT_DIR=\"" + env_dir + "\" ")
                .code == 0);
    CHECK(std::filesystem::exists(tmp.path() / "flag_out" / "report.json"));
  }
}

TEST_CASE("configuration and data failures use distinct exit codes") {
  testutil::TempDir tmp;
  std::string dataset = write_dataset(tmp.path());

  SUBCASE("unknown config field exits 2 and names the field") {
    std::string config = write_config(tmp.path(), dataset, (tmp.path() / "o").string(),
                                      ",\n  \"epsilonn\": 3.5");
    CmdResult r = run_cli("run --config \"" + config + "\"", tmp.path());
    CHECK(r.code == 2);
    CHECK(r.err.find("config error") != std::string::npos);
    CHECK(r.err.find("epsilonn") != std::string::npos);
  }
  SUBCASE("missing dataset exits 3") {
    std::string config =
        write_config(tmp.path(), (tmp.path() / "nope.csv").string(), (tmp.path() / "o").string());
    CmdResult r = run_cli("run --config \"" + config + "\"", tmp.path());
    CHECK(r.code == 3);
    CHECK(r.err.find("data error") != std::string::npos);
  }
  SUBCASE("missing required option exits 2") {
    CmdResult r = run_cli("encrypt", tmp.path());
    CHECK(r.code == 2);
  }
  SUBCASE("missing config file exits 2") {
    CmdResult r = run_cli("run --config \"" + (tmp.path() / "ghost.json").string() + "\"",
                          tmp.path());
    CHECK(r.code == 2);
  }
}

TEST_CASE("keygen writes stable 44-character keys when seeded") {
  testutil::TempDir tmp;
  CmdResult a = run_cli("keygen --seed 5", tmp.path());
  REQUIRE(a.code == 0);
  REQUIRE(a.out.size() == 45);  // 44 chars + newline
  CHECK(a.out.back() == '\n');

  CmdResult b = run_cli("keygen --seed 5", tmp.path());
  CHECK(b.out == a.out);
  CmdResult c = run_cli("keygen --seed 6", tmp.path());
  CHECK(c.out != a.out);

  auto key_path = tmp.path() / "key.txt";
  CmdResult d = run_cli("keygen --seed 5 --out \"" + key_path.string() + "\"", tmp.path());
  REQUIRE(d.code == 0);
  CHECK(testutil::read_file(key_path) == a.out);

  CmdResult random1 = run_cli("keygen", tmp.path());
  CmdResult random2 = run_cli("keygen", tmp.path());
  REQUIRE(random1.code == 0);
  CHECK(random1.out.size() == 45);
  CHECK(random1.out != random2.out);
}

TEST_CASE("encrypt and decrypt round-trip a binary file") {
  testutil::TempDir tmp;
  auto key_path = tmp.path() / "key.txt";
  REQUIRE(run_cli("keygen --seed 11 --out \"" + key_path.string() + "\"", tmp.path()).code == 0);

  std::string payload;
  for (int i = 0; i < 1024; ++i) payload.push_back(static_cast<char>(i * 31 % 256));
  auto plain_path = tmp.path() / "plain.bin";
  write_text(plain_path, payload);

  auto token_path = tmp.path() / "token.txt";
  auto back_path = tmp.path() / "back.bin";
  REQUIRE(run_cli("encrypt --key \"" + key_path.string() + "\" --in \"" + plain_path.string() +
                      "\" --out \"" + token_path.string() + "\"",
                  tmp.path())
              .code == 0);
  REQUIRE(run_cli("decrypt --key \"" + key_path.string() + "\" --in \"" + token_path.string() +
                      "\" --out \"" + back_path.string() + "\"",
                  tmp.path())
              .code == 0);
  CHECK(testutil::read_file(back_path) == payload);

  auto wrong_path = tmp.path() / "wrong.txt";
  REQUIRE(run_cli("keygen --seed 12 --out \"" + wrong_path.string() + "\"", tmp.path()).code == 0);
  CmdResult bad = run_cli("decrypt --key \"" + wrong_path.string() + "\" --in \"" +
                              token_path.string() + "\" --out \"" + back_path.string() + "\"",
                          tmp.path());
  CHECK(bad.code == 4);
  CHECK(bad.err.find("InvalidSignature") != std::string::npos);
  CHECK(bad.err.find("crypto error") != std::string::npos);
}

TEST_CASE("decrypt handles a token produced by a reference implementation") {
  testutil::TempDir tmp;
  auto key_path = tmp.path() / "key.txt";
  auto token_path = tmp.path() / "token.txt";
  write_text(key_path, "cw_0x689RpI-jtRR7oE8h_eQsKImvJapLeSbXpwF4e4=\n");
  write_text(token_path,
             "gAAAAAAdwJ6wAAECAwQFBgcICQoLDA0ODy021cpGVWKZ_eEwCGM4BLLF_5CV9dOPmrhuVUPgJo"
             "bwOz7JcbmrR64jVmpU4IwqDA==\n");
  auto out_path = tmp.path() / "plain.txt";
  CmdResult r = run_cli("decrypt --key \"" + key_path.string() + "\" --in \"" +
                            token_path.string() + "\" --out \"" + out_path.string() + "\"",
                        tmp.path());
  REQUIRE(r.code == 0);
  CHECK(testutil::read_file(out_path) == "hello");

  // An expired token only fails when a ttl is requested.
  CmdResult ttl = run_cli("decrypt --key \"" + key_path.string() + "\" --in \"" +
                              token_path.string() + "\" --out \"" + out_path.string() +
                              "\" --ttl 60",
                          tmp.path());
  CHECK(ttl.code == 4);
  CHECK(ttl.err.find("Expired") != std::string::npos);
}

TEST_CASE("split materializes the partition assignment") {
  testutil::TempDir tmp;
  std::string dataset = write_dataset(tmp.path());
  std::string out_dir = (tmp.path() / "splits").string();
  std::string config = write_config(tmp.path(), dataset, out_dir);

  CmdResult r = run_cli("split --config \"" + config + "\"", tmp.path());
  INFO("stderr: " << r.err);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("train=200 test=50") != std::string::npos);
  CHECK(r.out.find("client 0:") != std::string::npos);

  json doc = json::parse(testutil::read_file(tmp.path() / "splits" / "partitions.json"));
  CHECK(doc["n_rows_total"] == 250);
  CHECK(doc["test_row_ids"].size() == 50);
  REQUIRE(doc["clients"].size() == 3);
  std::size_t total = 0;
  for (const json& c : doc["clients"]) total += c["row_ids"].size();
  CHECK(total == 200);
}
