#include "fedsim/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedsim/error.hpp"

namespace fedsim {

namespace {

constexpr double kHessianFloor = 1e-16;

struct SplitChoice {
  bool found = false;
  std::int32_t feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  std::size_t sorted_prefix = 0;  // rows [0, prefix) of the sorted order go left
};

double leaf_objective(double g_sum, double h_sum, double lambda_reg) {
  return (g_sum * g_sum) / (h_sum + lambda_reg);
}

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& ds, const std::vector<double>& grad, const std::vector<double>& hess,
              const GbdtHyper& hyper)
      : ds_(ds), grad_(grad), hess_(hess), hyper_(hyper) {}

  Tree build() {
    std::vector<std::size_t> rows(ds_.n_rows());
    std::iota(rows.begin(), rows.end(), 0);
    Tree tree;
    grow(tree, rows, 0);
    return tree;
  }

 private:
  // Appends the subtree for `rows` and returns its root index.
  std::int32_t grow(Tree& tree, std::vector<std::size_t>& rows, int depth) {
    const auto index = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();

    double g_sum = 0.0;
    double h_sum = 0.0;
    for (std::size_t r : rows) {
      g_sum += grad_[r];
      h_sum += hess_[r];
    }

    SplitChoice split;
    std::vector<std::size_t> sorted;
    if (depth < hyper_.max_depth && rows.size() >= 2) {
      split = best_split(rows, g_sum, h_sum, sorted);
    }

    if (!split.found) {
      double weight = -g_sum / (h_sum + hyper_.lambda_reg);
      if (weight == 0.0) weight = 0.0;  // never store -0.0; it has no canonical text form
      tree.nodes[static_cast<std::size_t>(index)].weight = weight;
      return index;
    }

    std::vector<std::size_t> left_rows(sorted.begin(),
                                       sorted.begin() + static_cast<std::ptrdiff_t>(split.sorted_prefix));
    std::vector<std::size_t> right_rows(sorted.begin() + static_cast<std::ptrdiff_t>(split.sorted_prefix),
                                        sorted.end());
    // Children query rows in ascending position so summation order never
    // depends on which feature the parent split on.
    std::sort(left_rows.begin(), left_rows.end());
    std::sort(right_rows.begin(), right_rows.end());
    rows.clear();
    rows.shrink_to_fit();

    std::int32_t left = grow(tree, left_rows, depth + 1);
    std::int32_t right = grow(tree, right_rows, depth + 1);
    TreeNode& node = tree.nodes[static_cast<std::size_t>(index)];
    node.feature_index = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return index;
  }

  // Exact greedy search over all features and all midpoints of consecutive
  // distinct values. Strict '>' on gain means the lowest feature index and
  // then the lowest threshold wins ties.
  SplitChoice best_split(const std::vector<std::size_t>& rows, double g_sum, double h_sum,
                         std::vector<std::size_t>& best_sorted) const {
    SplitChoice best;
    const double parent = leaf_objective(g_sum, h_sum, hyper_.lambda_reg);
    std::vector<std::size_t> sorted(rows);

    for (std::size_t f = 0; f < ds_.n_features(); ++f) {
      std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        double va = ds_.row(a)[f];
        double vb = ds_.row(b)[f];
        if (va != vb) return va < vb;
        return a < b;
      });

      double gl = 0.0;
      double hl = 0.0;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        gl += grad_[sorted[i]];
        hl += hess_[sorted[i]];
        double lo = ds_.row(sorted[i])[f];
        double hi = ds_.row(sorted[i + 1])[f];
        if (lo == hi) continue;
        double hr = h_sum - hl;
        if (hl < hyper_.min_child_weight || hr < hyper_.min_child_weight) continue;
        double gr = g_sum - gl;
        double gain = 0.5 * (leaf_objective(gl, hl, hyper_.lambda_reg) +
                             leaf_objective(gr, hr, hyper_.lambda_reg) - parent);
        if (gain > 0.0 && gain > best.gain) {
          best.found = true;
          best.feature = static_cast<std::int32_t>(f);
          best.threshold = 0.5 * (lo + hi);
          best.gain = gain;
          best.sorted_prefix = i + 1;
          best_sorted = sorted;
        }
      }
    }
    return best;
  }

  const Dataset& ds_;
  const std::vector<double>& grad_;
  const std::vector<double>& hess_;
  const GbdtHyper& hyper_;
};

}  // namespace

void GbdtHyper::validate() const {
  if (trees_total < 1) raise(ErrorCode::invalid_hyper, "trees_total must be >= 1");
  if (max_depth < 1) raise(ErrorCode::invalid_hyper, "max_depth must be >= 1");
  if (!(learning_rate > 0.0) || learning_rate > 1.0) {
    raise(ErrorCode::invalid_hyper, "learning_rate must lie in (0, 1]");
  }
  if (!(lambda_reg >= 0.0)) raise(ErrorCode::invalid_hyper, "lambda_reg must be >= 0");
  if (!(min_child_weight >= 0.0)) {
    raise(ErrorCode::invalid_hyper, "min_child_weight must be >= 0");
  }
}

double Tree::leaf_weight(std::span<const double> x) const {
  std::size_t idx = 0;
  for (;;) {
    const TreeNode& node = nodes[idx];
    if (node.is_leaf()) return node.weight;
    idx = static_cast<std::size_t>(
        x[static_cast<std::size_t>(node.feature_index)] < node.threshold ? node.left : node.right);
  }
}

double logistic_loss(double score, int label) {
  return std::max(score, 0.0) + std::log1p(std::exp(-std::abs(score))) -
         static_cast<double>(label) * score;
}

GbdtModel train_increment(std::optional<GbdtModel> model, const Dataset& ds,
                          const GbdtHyper& hyper, int n_new_trees, std::uint64_t /*seed*/) {
  hyper.validate();
  if (n_new_trees < 0) raise(ErrorCode::invalid_hyper, "n_new_trees must be >= 0");
  if (ds.n_rows() == 0) raise(ErrorCode::empty_data, "cannot train on an empty dataset");
  if (ds.n_features() == 0) raise(ErrorCode::empty_data, "dataset has no features");

  GbdtModel out;
  if (model.has_value()) {
    out = std::move(*model);
    if (out.format_version != 1) {
      raise(ErrorCode::malformed_model,
            "unsupported format_version " + std::to_string(out.format_version));
    }
    if (out.n_features != static_cast<std::int32_t>(ds.n_features())) {
      raise(ErrorCode::dimension_mismatch,
            "model expects " + std::to_string(out.n_features) + " features, dataset has " +
                std::to_string(ds.n_features()));
    }
    if (out.learning_rate != hyper.learning_rate) {
      raise(ErrorCode::invalid_hyper, "model was trained with learning_rate " +
                                          std::to_string(out.learning_rate) +
                                          ", requested " + std::to_string(hyper.learning_rate));
    }
  } else {
    const auto positives = static_cast<double>(ds.count_label(1));
    const auto total = static_cast<double>(ds.n_rows());
    if (positives == 0.0 || positives == total) {
      raise(ErrorCode::single_class_init,
            "base score needs both classes in the training data");
    }
    double p = positives / total;
    out.base_score = std::log(p / (1.0 - p));
    out.learning_rate = hyper.learning_rate;
    out.n_features = static_cast<std::int32_t>(ds.n_features());
  }

  // Raw scores replayed tree by tree from the base: this makes resuming a
  // model bit-identical to having trained all trees in one call.
  const std::size_t n = ds.n_rows();
  std::vector<double> score(n, out.base_score);
  for (const Tree& tree : out.trees) {
    for (std::size_t i = 0; i < n; ++i) {
      score[i] += out.learning_rate * tree.leaf_weight(ds.row(i));
    }
  }

  std::vector<double> grad(n);
  std::vector<double> hess(n);
  for (int t = 0; t < n_new_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      double p = sigmoid(score[i]);
      grad[i] = p - static_cast<double>(ds.labels[i]);
      hess[i] = std::max(p * (1.0 - p), kHessianFloor);
    }
    Tree tree = TreeBuilder(ds, grad, hess, hyper).build();
    for (std::size_t i = 0; i < n; ++i) {
      score[i] += out.learning_rate * tree.leaf_weight(ds.row(i));
    }
    out.trees.push_back(std::move(tree));
  }

  out.n_train = static_cast<std::int64_t>(n);
  return out;
}

double predict_raw(const GbdtModel& model, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(model.n_features)) {
    raise(ErrorCode::dimension_mismatch, "input has " + std::to_string(x.size()) +
                                             " features, model expects " +
                                             std::to_string(model.n_features));
  }
  double score = model.base_score;
  for (const Tree& tree : model.trees) {
    score += model.learning_rate * tree.leaf_weight(x);
  }
  return score;
}

double predict_proba(const GbdtModel& model, std::span<const double> x) {
  return sigmoid(predict_raw(model, x));
}

}  // namespace fedsim
