#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedsim/dataset.hpp"

namespace fedsim {

struct SmoteConfig {
  int k_neighbors = 5;
  // Desired minority/majority count ratio after synthesis, in (0, 1].
  double target_ratio = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Interpolate between a minority point and one of its neighbors:
// out[i] = x[i] + u * (neighbor[i] - x[i]), clamped per coordinate to the
// interval spanned by the two parents so rounding can never leave it.
std::vector<double> synth_point(std::span<const double> x, std::span<const double> neighbor,
                                double u);

// Classic minority oversampling: for each synthetic row, pick a random
// minority point, one of its k nearest minority neighbors (Euclidean, ties
// broken by lower row position), and a uniform interpolation factor.
// Original rows are preserved untouched, in order, ahead of synthetic ones;
// synthetic rows get fresh ids above the existing maximum.
Dataset oversample(const Dataset& ds, const SmoteConfig& cfg);

}  // namespace fedsim
