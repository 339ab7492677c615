#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fedsim/error.hpp"
#include "fedsim/gbdt.hpp"
#include "fedsim/rng.hpp"
#include "support/testutil.hpp"

using fedsim::Dataset;
using fedsim::Error;
using fedsim::GbdtHyper;
using fedsim::GbdtModel;
using fedsim::RngStream;
using fedsim::Tree;
using fedsim::TreeNode;

namespace {

Dataset single_row(double x, int y) {
  Dataset ds;
  ds.feature_names = {"x"};
  ds.append_row(std::vector<double>{x}, y, 0);
  return ds;
}

Dataset from_columns(const std::vector<std::vector<double>>& rows, const std::vector<int>& ys) {
  Dataset ds;
  for (std::size_t j = 0; j < rows[0].size(); ++j) ds.feature_names.push_back("f" + std::to_string(j));
  for (std::size_t i = 0; i < rows.size(); ++i) ds.append_row(rows[i], ys[i], static_cast<std::int64_t>(i));
  return ds;
}

GbdtModel empty_model(int n_features, double lr = 0.1) {
  GbdtModel m;
  m.base_score = 0.0;
  m.learning_rate = lr;
  m.n_features = n_features;
  m.n_train = 0;
  return m;
}

double mean_loss(const GbdtModel& m, const Dataset& ds) {
  double total = 0.0;
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    total += fedsim::logistic_loss(fedsim::predict_raw(m, ds.row(i)), ds.labels[i]);
  }
  return total / static_cast<double>(ds.n_rows());
}

}  // namespace

TEST_CASE("balanced data initializes to even odds") {
  Dataset ds = testutil::make_blobs(20, 20, 2, 1);
  GbdtHyper hyper;
  GbdtModel m = fedsim::train_increment(std::nullopt, ds, hyper, 0, 7);
  CHECK(m.base_score == 0.0);
  CHECK(m.trees.empty());
  std::vector<double> x = {3.0, -1.0};
  CHECK(fedsim::predict_proba(m, x) == 0.5);
}

TEST_CASE("one leaf on one row reproduces the newton step by hand") {
  // Start from even odds: g = p - y = -0.5, h = p(1-p) = 0.25, so the single
  // leaf gets -(-0.5)/(0.25 + 1) = 0.4 and the raw score moves by lr * 0.4.
  GbdtHyper hyper;
  hyper.max_depth = 1;
  hyper.lambda_reg = 1.0;
  Dataset ds = single_row(2.0, 1);
  GbdtModel m = fedsim::train_increment(empty_model(1), ds, hyper, 1, 0);
  REQUIRE(m.trees.size() == 1);
  REQUIRE(m.trees[0].nodes.size() == 1);
  CHECK(m.trees[0].nodes[0].weight == doctest::Approx(0.4).epsilon(1e-15));
  std::vector<double> x = {2.0};
  CHECK(fedsim::predict_raw(m, x) == doctest::Approx(0.04).epsilon(1e-15));
  CHECK(fedsim::predict_proba(m, x) == doctest::Approx(0.50999867).epsilon(1e-7));
}

TEST_CASE("gradients and hessians agree with finite differences") {
  // Oracle: central differences of the logistic loss at h = 1e-5.
  const double h = 1e-5;
  RngStream rng = RngStream::derive(17, "fd", 0);
  for (int trial = 0; trial < 300; ++trial) {
    double s = (rng.next_unit() * 2.0 - 1.0) * 6.0;
    int y = rng.next_below(2) ? 1 : 0;
    double p = fedsim::sigmoid(s);

    double numeric_g =
        (fedsim::logistic_loss(s + h, y) - fedsim::logistic_loss(s - h, y)) / (2.0 * h);
    REQUIRE(std::abs(numeric_g - (p - y)) <= 1e-6);

    auto grad = [&](double score) { return fedsim::sigmoid(score) - y; };
    double numeric_h = (grad(s + h) - grad(s - h)) / (2.0 * h);
    REQUIRE(std::abs(numeric_h - p * (1.0 - p)) <= 1e-6);
  }
}

TEST_CASE("training loss never increases as trees are appended") {
  Dataset ds = testutil::make_blobs(60, 40, 4, 3);
  GbdtHyper hyper;
  hyper.trees_total = 40;
  GbdtModel m = fedsim::train_increment(std::nullopt, ds, hyper, 40, 1);
  REQUIRE(m.trees.size() == 40);

  GbdtModel prefix = m;
  prefix.trees.clear();
  double prev = mean_loss(prefix, ds);
  for (const Tree& tree : m.trees) {
    prefix.trees.push_back(tree);
    double cur = mean_loss(prefix, ds);
    REQUIRE(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("split search prefers the lowest feature then the lowest threshold") {
  GbdtHyper hyper;
  hyper.max_depth = 1;
  hyper.min_child_weight = 0.0;

  SUBCASE("identical columns tie on gain, feature 0 wins") {
    Dataset ds = from_columns({{0, 0}, {0, 0}, {1, 1}, {1, 1}}, {0, 0, 1, 1});
    GbdtModel m = fedsim::train_increment(empty_model(2), ds, hyper, 1, 0);
    const TreeNode& root = m.trees[0].nodes[0];
    REQUIRE_FALSE(root.is_leaf());
    CHECK(root.feature_index == 0);
    CHECK(root.threshold == 0.5);
  }
  SUBCASE("mirror-symmetric labels tie across thresholds, lower threshold wins") {
    Dataset ds = from_columns({{0}, {1}, {2}, {3}}, {1, 0, 0, 1});
    GbdtModel m = fedsim::train_increment(empty_model(1), ds, hyper, 1, 0);
    const TreeNode& root = m.trees[0].nodes[0];
    REQUIRE_FALSE(root.is_leaf());
    CHECK(root.feature_index == 0);
    CHECK(root.threshold == 0.5);
  }
}

TEST_CASE("min_child_weight can forbid every split") {
  Dataset ds = testutil::make_blobs(30, 30, 3, 4);
  GbdtHyper hyper;
  hyper.min_child_weight = 1000.0;  // hessian mass of 60 rows maxes at 15
  GbdtModel m = fedsim::train_increment(std::nullopt, ds, hyper, 1, 0);
  REQUIRE(m.trees.size() == 1);
  CHECK(m.trees[0].nodes.size() == 1);
  CHECK(m.trees[0].nodes[0].is_leaf());
}

TEST_CASE("a tree of zero-weight leaves changes nothing") {
  Dataset ds = testutil::make_blobs(25, 25, 2, 5);
  GbdtHyper hyper;
  GbdtModel m = fedsim::train_increment(std::nullopt, ds, hyper, 5, 0);
  std::vector<double> x = {0.4, -2.0};
  double before = fedsim::predict_proba(m, x);
  Tree zero;
  zero.nodes.push_back(TreeNode{});  // leaf, weight 0
  m.trees.push_back(zero);
  CHECK(fedsim::predict_proba(m, x) == before);
}

TEST_CASE("two half-runs equal one full run bit for bit") {
  Dataset ds = testutil::make_blobs(80, 50, 5, 6);
  GbdtHyper hyper;
  GbdtModel whole = fedsim::train_increment(std::nullopt, ds, hyper, 24, 9);
  GbdtModel half = fedsim::train_increment(std::nullopt, ds, hyper, 12, 9);
  GbdtModel resumed = fedsim::train_increment(half, ds, hyper, 12, 9);
  CHECK(fedsim::serialize(resumed) == fedsim::serialize(whole));
}

TEST_CASE("training beats the majority rate on its own data") {
  Dataset ds = testutil::make_blobs(70, 40, 4, 7);
  GbdtHyper hyper;
  GbdtModel m = fedsim::train_increment(std::nullopt, ds, hyper, 30, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    int pred = fedsim::predict_proba(m, ds.row(i)) >= 0.5 ? 1 : 0;
    if (pred == ds.labels[i]) ++correct;
  }
  double majority = 70.0 / 110.0;
  CHECK(static_cast<double>(correct) / 110.0 > majority);
  CHECK(m.n_train == 110);
}

TEST_CASE("training input validation") {
  GbdtHyper hyper;
  SUBCASE("single class at init") {
    Dataset ds = testutil::make_blobs(12, 0, 2, 8);
    CHECK_THROWS_WITH_AS(fedsim::train_increment(std::nullopt, ds, hyper, 1, 0),
                         doctest::Contains("SingleClassInit"), Error);
  }
  SUBCASE("bad hyperparameters") {
    Dataset ds = testutil::make_blobs(10, 10, 2, 9);
    GbdtHyper bad = hyper;
    bad.trees_total = 0;
    CHECK_THROWS_WITH_AS(fedsim::train_increment(std::nullopt, ds, bad, 1, 0),
                         doctest::Contains("InvalidHyper"), Error);
    bad = hyper;
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(fedsim::train_increment(std::nullopt, ds, bad, 1, 0), Error);
    bad = hyper;
    bad.learning_rate = 1.5;
    CHECK_THROWS_AS(fedsim::train_increment(std::nullopt, ds, bad, 1, 0), Error);
    bad = hyper;
    bad.max_depth = 0;
    CHECK_THROWS_AS(fedsim::train_increment(std::nullopt, ds, bad, 1, 0), Error);
    bad = hyper;
    bad.lambda_reg = -0.1;
    CHECK_THROWS_AS(fedsim::train_increment(std::nullopt, ds, bad, 1, 0), Error);
  }
  SUBCASE("resuming with a different feature count") {
    Dataset ds2 = testutil::make_blobs(10, 10, 2, 10);
    Dataset ds3 = testutil::make_blobs(10, 10, 3, 10);
    GbdtModel m = fedsim::train_increment(std::nullopt, ds2, hyper, 1, 0);
    CHECK_THROWS_WITH_AS(fedsim::train_increment(m, ds3, hyper, 1, 0),
                         doctest::Contains("DimensionMismatch"), Error);
  }
}

TEST_CASE("prediction rejects the wrong dimension") {
  Dataset ds = testutil::make_blobs(10, 10, 3, 11);
  GbdtHyper hyper;
  GbdtModel m = fedsim::train_increment(std::nullopt, ds, hyper, 2, 0);
  std::vector<double> wrong = {1.0, 2.0};
  CHECK_THROWS_WITH_AS(fedsim::predict_proba(m, wrong), doctest::Contains("DimensionMismatch"),
                       Error);
}

TEST_CASE("predict_proba stays strictly inside (0,1)") {
  Dataset ds = testutil::make_blobs(40, 40, 2, 12, 0.2);  // nearly separable
  GbdtHyper hyper;
  hyper.trees_total = 60;
  GbdtModel m = fedsim::train_increment(std::nullopt, ds, hyper, 60, 0);
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    double p = fedsim::predict_proba(m, ds.row(i));
    REQUIRE(p > 0.0);
    REQUIRE(p < 1.0);
  }
}

TEST_CASE("serialization round-trips models exactly") {
  Dataset ds = testutil::make_blobs(50, 35, 4, 13);
  GbdtHyper hyper;
  GbdtModel m = fedsim::train_increment(std::nullopt, ds, hyper, 20, 1);

  std::string bytes = fedsim::serialize(m);
  CHECK(fedsim::serialize(m) == bytes);  // canonical: same bytes every time

  GbdtModel back = fedsim::deserialize(bytes);
  CHECK(back.base_score == m.base_score);
  CHECK(back.learning_rate == m.learning_rate);
  CHECK(back.n_train == m.n_train);
  CHECK(back.n_features == m.n_features);
  REQUIRE(back.trees.size() == m.trees.size());
  CHECK(fedsim::serialize(back) == bytes);

  RngStream rng = RngStream::derive(14, "roundtrip", 0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x;
    for (int j = 0; j < 4; ++j) x.push_back((rng.next_unit() * 2.0 - 1.0) * 8.0);
    REQUIRE(fedsim::predict_proba(back, x) == fedsim::predict_proba(m, x));
  }
}

TEST_CASE("negative zero leaves serialize canonically") {
  GbdtModel m = empty_model(1);
  Tree t;
  TreeNode leaf;
  leaf.weight = -0.0;
  t.nodes.push_back(leaf);
  m.trees.push_back(t);
  m.base_score = -0.0;
  std::string bytes = fedsim::serialize(m);
  CHECK(bytes.find("-0") == std::string::npos);
  GbdtModel back = fedsim::deserialize(bytes);
  CHECK(fedsim::serialize(back) == bytes);
}

TEST_CASE("malformed documents are rejected") {
  Dataset ds = testutil::make_blobs(20, 15, 2, 15);
  GbdtHyper hyper;
  GbdtModel m = fedsim::train_increment(std::nullopt, ds, hyper, 3, 0);
  std::string good = fedsim::serialize(m);

  SUBCASE("not json") {
    CHECK_THROWS_WITH_AS(fedsim::deserialize("genuinely not json"),
                         doctest::Contains("MalformedModel"), Error);
  }
  SUBCASE("unknown field") {
    std::string doc = good;
    doc.insert(1, "\"extra\":1,");
    CHECK_THROWS_WITH_AS(fedsim::deserialize(doc), doctest::Contains("unknown field"), Error);
  }
  SUBCASE("wrong version") {
    std::string doc = good;
    auto pos = doc.find("\"format_version\":1");
    REQUIRE(pos != std::string::npos);
    doc.replace(pos, 18, "\"format_version\":2");
    CHECK_THROWS_WITH_AS(fedsim::deserialize(doc), doctest::Contains("format_version"), Error);
  }
  SUBCASE("a mutated value fails the digest even as valid JSON") {
    std::string doc = good;
    auto pos = doc.find("\"learning_rate\":0.1");
    REQUIRE(pos != std::string::npos);
    doc.replace(pos, 19, "\"learning_rate\":0.2");  // in range, well formed
    CHECK_THROWS_WITH_AS(fedsim::deserialize(doc), doctest::Contains("checksum mismatch"),
                         Error);
  }
  SUBCASE("an equivalent spelling of a value re-renders canonically") {
    std::string doc = good;
    auto pos = doc.find("\"learning_rate\":0.1");
    REQUIRE(pos != std::string::npos);
    doc.replace(pos, 19, "\"learning_rate\":0.10");  // same double, new text
    GbdtModel back = fedsim::deserialize(doc);
    CHECK(fedsim::serialize(back) == good);
  }
  SUBCASE("every single-byte flip is detected") {
    int detected = 0;
    const int trials = 100;
    for (int i = 0; i < trials; ++i) {
      std::string doc = good;
      std::size_t pos = (good.size() - 1) * static_cast<std::size_t>(i) / (trials - 1);
      doc[pos] ^= 0x01;
      try {
        fedsim::deserialize(doc);
      } catch (const Error&) {
        ++detected;
      }
    }
    // No silent acceptance: the digest covers every byte of the body.
    CHECK(detected == trials);
  }
}
