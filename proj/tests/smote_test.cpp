#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fedsim/error.hpp"
#include "fedsim/smote.hpp"
#include "support/testutil.hpp"

using fedsim::Dataset;
using fedsim::Error;
using fedsim::SmoteConfig;

TEST_CASE("synth_point interpolates and clamps per coordinate") {
  std::vector<double> x = {0.0, 10.0, -4.0};
  std::vector<double> nb = {1.0, 6.0, -4.0};

  CHECK(fedsim::synth_point(x, nb, 0.0) == x);
  CHECK(fedsim::synth_point(x, nb, 1.0) == nb);

  auto mid = fedsim::synth_point(x, nb, 0.25);
  CHECK(mid[0] == doctest::Approx(0.25));
  CHECK(mid[1] == doctest::Approx(9.0));
  CHECK(mid[2] == -4.0);

  for (double u : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    auto p = fedsim::synth_point(x, nb, u);
    for (std::size_t j = 0; j < x.size(); ++j) {
      CHECK(p[j] >= std::min(x[j], nb[j]));
      CHECK(p[j] <= std::max(x[j], nb[j]));
    }
  }
}

TEST_CASE("oversample hits the exact target count") {
  // 167 majority / 72 minority, the shape of a client shard.
  Dataset ds = testutil::make_blobs(167, 72, 4, 11);
  SmoteConfig cfg;
  cfg.seed = 5;
  Dataset out = fedsim::oversample(ds, cfg);
  CHECK(out.count_label(0) == 167);
  CHECK(out.count_label(1) == 167);  // 95 synthetic rows
  CHECK(out.n_rows() == 334);
}

TEST_CASE("oversample leaves balanced data untouched") {
  Dataset ds = testutil::make_blobs(50, 50, 3, 12);
  SmoteConfig cfg;
  Dataset out = fedsim::oversample(ds, cfg);
  CHECK(out.n_rows() == 100);
  CHECK(out.values == ds.values);
  CHECK(out.row_ids == ds.row_ids);
}

TEST_CASE("oversample rejects too few minority rows") {
  Dataset ds = testutil::make_blobs(30, 4, 2, 13);
  SmoteConfig cfg;  // k_neighbors=5 needs at least 6 minority rows
  CHECK_THROWS_WITH_AS(fedsim::oversample(ds, cfg), doctest::Contains("TooFewMinority"), Error);
}

TEST_CASE("oversample rejects single-class data") {
  Dataset ds = testutil::make_blobs(25, 0, 2, 14);
  SmoteConfig cfg;
  CHECK_THROWS_WITH_AS(fedsim::oversample(ds, cfg), doctest::Contains("SingleClass"), Error);
}

TEST_CASE("oversample config validation") {
  Dataset ds = testutil::make_blobs(30, 10, 2, 15);
  SmoteConfig cfg;
  SUBCASE("k_neighbors must be positive") {
    cfg.k_neighbors = 0;
    CHECK_THROWS_AS(fedsim::oversample(ds, cfg), Error);
  }
  SUBCASE("target_ratio must lie in (0,1]") {
    cfg.target_ratio = 0.0;
    CHECK_THROWS_AS(fedsim::oversample(ds, cfg), Error);
    cfg.target_ratio = 1.5;
    CHECK_THROWS_AS(fedsim::oversample(ds, cfg), Error);
  }
}

TEST_CASE("oversample count law and hull bound over random shapes") {
  fedsim::RngStream rng = fedsim::RngStream::derive(999, "smote_prop", 0);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n_minority = 7 + rng.next_below(40);
    std::size_t n_majority = n_minority + rng.next_below(60);
    std::size_t n_features = 1 + rng.next_below(5);
    SmoteConfig cfg;
    cfg.k_neighbors = static_cast<int>(1 + rng.next_below(5));
    cfg.target_ratio = 0.5 + 0.5 * rng.next_unit();
    cfg.seed = rng.next_u64();

    Dataset ds = testutil::make_blobs(n_majority, n_minority, n_features, cfg.seed ^ 0xabcd);
    Dataset out = fedsim::oversample(ds, cfg);

    // Count law: minority grows to round(ratio * majority), never shrinks.
    auto target = static_cast<std::size_t>(
        std::lround(cfg.target_ratio * static_cast<double>(n_majority)));
    std::size_t expect = std::max(target, n_minority);
    REQUIRE(out.count_label(1) == expect);
    REQUIRE(out.count_label(0) == n_majority);

    // Originals first, bit-identical, then synthetic rows with fresh ids.
    REQUIRE(std::equal(ds.values.begin(), ds.values.end(), out.values.begin()));
    std::int64_t max_id = *std::max_element(ds.row_ids.begin(), ds.row_ids.end());
    double min1 = 1e300, max1 = -1e300;
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
      if (ds.labels[i] != 1) continue;
      for (double v : ds.row(i)) {
        min1 = std::min(min1, v);
        max1 = std::max(max1, v);
      }
    }
    for (std::size_t i = ds.n_rows(); i < out.n_rows(); ++i) {
      REQUIRE(out.labels[i] == 1);
      REQUIRE(out.row_ids[i] > max_id);
      // Interpolation between minority points stays inside their bounding box.
      for (double v : out.row(i)) {
        REQUIRE(v >= min1);
        REQUIRE(v <= max1);
      }
    }
  }
}

TEST_CASE("oversample is deterministic in the seed") {
  Dataset ds = testutil::make_blobs(60, 20, 3, 16);
  SmoteConfig cfg;
  cfg.seed = 123;
  Dataset a = fedsim::oversample(ds, cfg);
  Dataset b = fedsim::oversample(ds, cfg);
  CHECK(a.values == b.values);
  CHECK(a.row_ids == b.row_ids);
  cfg.seed = 124;
  Dataset c = fedsim::oversample(ds, cfg);
  CHECK(a.values != c.values);
}
