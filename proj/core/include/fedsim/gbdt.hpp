#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedsim/dataset.hpp"

namespace fedsim {

struct GbdtHyper {
  int trees_total = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  double lambda_reg = 1.0;        // L2 penalty on leaf weights
  double min_child_weight = 1.0;  // minimum hessian mass on each side of a split

  void validate() const;  // throws InvalidHyper
};

struct TreeNode {
  std::int32_t feature_index = -1;  // -1 marks a leaf
  double threshold = 0.0;           // rows go left iff x[feature] < threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  double weight = 0.0;  // leaf value in log-odds space, before learning-rate scaling

  bool is_leaf() const { return feature_index < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double leaf_weight(std::span<const double> x) const;
};

struct GbdtModel {
  int format_version = 1;
  double base_score = 0.0;  // log-odds of the training positive rate
  double learning_rate = 0.1;
  std::int64_t n_train = 0;  // rows used by the most recent training call
  std::int32_t n_features = 0;
  std::vector<Tree> trees;
};

inline double sigmoid(double score) { return 1.0 / (1.0 + std::exp(-score)); }

// Numerically stable logistic loss ln(1 + e^s) - y*s at raw score s.
double logistic_loss(double score, int label);

// Grow `n_new_trees` Newton-boosted trees on `ds`, continuing from `model`
// when given. Resuming from a model trained for T trees and adding T' more
// yields bit-identical results to a single (T + T')-tree run on the same
// data. The `seed` parameter is reserved for stochastic variants; the
// exact-greedy learner here is fully deterministic.
GbdtModel train_increment(std::optional<GbdtModel> model, const Dataset& ds,
                          const GbdtHyper& hyper, int n_new_trees, std::uint64_t seed);

double predict_raw(const GbdtModel& model, std::span<const double> x);
double predict_proba(const GbdtModel& model, std::span<const double> x);

// Canonical JSON encoding with an embedded SHA-256 checksum. Deserializing
// re-renders the document and recomputes the digest, so any byte change in a
// value is rejected even if the JSON stays well formed.
std::string serialize(const GbdtModel& model);
GbdtModel deserialize(std::string_view bytes);

}  // namespace fedsim
