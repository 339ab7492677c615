#include "fedsim/metrics.hpp"

#include <string>

#include "fedsim/error.hpp"

namespace fedsim {

ConfusionCounts confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) {
    raise(ErrorCode::length_mismatch, "y_true has " + std::to_string(y_true.size()) +
                                          " entries, y_pred has " +
                                          std::to_string(y_pred.size()));
  }
  if (y_true.empty()) raise(ErrorCode::empty_input, "metrics need at least one sample");

  ConfusionCounts c;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    int t = y_true[i];
    int p = y_pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1)) {
      raise(ErrorCode::invalid_score, "labels must be 0 or 1");
    }
    if (t == 1 && p == 1) ++c.tp;
    else if (t == 0 && p == 1) ++c.fp;
    else if (t == 0 && p == 0) ++c.tn;
    else ++c.fn;
  }
  return c;
}

double accuracy(const ConfusionCounts& c) {
  if (c.total() == 0) raise(ErrorCode::empty_input, "empty confusion counts");
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

double f1(const ConfusionCounts& c) {
  if (c.total() == 0) raise(ErrorCode::empty_input, "empty confusion counts");
  std::int64_t denom = 2 * c.tp + c.fp + c.fn;
  if (denom == 0) return 0.0;
  return 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

bool f1_degenerate(const ConfusionCounts& c) { return 2 * c.tp + c.fp + c.fn == 0; }

}  // namespace fedsim
