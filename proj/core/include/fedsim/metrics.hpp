#pragma once

#include <cstdint>
#include <span>

namespace fedsim {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
};

ConfusionCounts confusion(std::span<const int> y_true, std::span<const int> y_pred);

double accuracy(const ConfusionCounts& c);

// F1 = 2*tp / (2*tp + fp + fn); defined as 0 when that denominator is 0
// (no true positives, no predicted positives). Callers can detect the
// convention case with f1_degenerate().
double f1(const ConfusionCounts& c);
bool f1_degenerate(const ConfusionCounts& c);

}  // namespace fedsim
