#include "fedsim/smote.hpp"

#include <algorithm>
#include <cmath>

#include "fedsim/error.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

void SmoteConfig::validate() const {
  if (k_neighbors < 1) raise(ErrorCode::invalid_config, "k_neighbors must be >= 1");
  if (!(target_ratio > 0.0) || target_ratio > 1.0) {
    raise(ErrorCode::invalid_config, "target_ratio must lie in (0, 1]");
  }
}

std::vector<double> synth_point(std::span<const double> x, std::span<const double> neighbor,
                                double u) {
  if (x.size() != neighbor.size()) {
    raise(ErrorCode::dimension_mismatch, "point has " + std::to_string(x.size()) +
                                             " features, neighbor has " +
                                             std::to_string(neighbor.size()));
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double lo = std::min(x[i], neighbor[i]);
    double hi = std::max(x[i], neighbor[i]);
    out[i] = std::clamp(x[i] + u * (neighbor[i] - x[i]), lo, hi);
  }
  return out;
}

Dataset oversample(const Dataset& ds, const SmoteConfig& cfg) {
  cfg.validate();

  const std::size_t n0 = ds.count_label(0);
  const std::size_t n1 = ds.count_label(1);
  if (n0 == 0 || n1 == 0) {
    raise(ErrorCode::single_class, "oversampling needs both classes present");
  }

  const int minority_label = (n1 <= n0) ? 1 : 0;
  const std::size_t minority_n = std::min(n0, n1);
  const std::size_t majority_n = std::max(n0, n1);
  const auto k = static_cast<std::size_t>(cfg.k_neighbors);

  if (minority_n < k + 1) {
    raise(ErrorCode::too_few_minority, "minority class has " + std::to_string(minority_n) +
                                           " rows, need >= k_neighbors + 1 = " +
                                           std::to_string(k + 1));
  }

  const auto target = static_cast<std::size_t>(
      std::llround(cfg.target_ratio * static_cast<double>(majority_n)));

  Dataset out = ds;
  if (target <= minority_n) return out;
  const std::size_t n_synthetic = target - minority_n;

  std::vector<std::size_t> minority_pos;
  minority_pos.reserve(minority_n);
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    if (ds.labels[i] == minority_label) minority_pos.push_back(i);
  }

  // k nearest minority neighbors of each minority row, brute force in the
  // raw feature space; ties resolved toward the lower row position.
  std::vector<std::vector<std::size_t>> neighbors(minority_n);
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t a = 0; a < minority_n; ++a) {
    auto xa = ds.row(minority_pos[a]);
    dist.clear();
    dist.reserve(minority_n - 1);
    for (std::size_t b = 0; b < minority_n; ++b) {
      if (b == a) continue;
      auto xb = ds.row(minority_pos[b]);
      double d2 = 0.0;
      for (std::size_t f = 0; f < xa.size(); ++f) {
        double diff = xa[f] - xb[f];
        d2 += diff * diff;
      }
      dist.emplace_back(d2, minority_pos[b]);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    neighbors[a].reserve(k);
    for (std::size_t j = 0; j < k; ++j) neighbors[a].push_back(dist[j].second);
  }

  RngStream rng = RngStream::derive(cfg.seed, "smote", 0);
  std::int64_t next_id = *std::max_element(ds.row_ids.begin(), ds.row_ids.end()) + 1;
  for (std::size_t s = 0; s < n_synthetic; ++s) {
    std::size_t base = static_cast<std::size_t>(rng.next_below(minority_n));
    std::size_t nbr = neighbors[base][static_cast<std::size_t>(rng.next_below(k))];
    double u = rng.next_unit();
    auto point = synth_point(ds.row(minority_pos[base]), ds.row(nbr), u);
    out.append_row(point, minority_label, next_id++);
  }
  return out;
}

}  // namespace fedsim
