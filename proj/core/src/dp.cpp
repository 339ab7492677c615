#include "fedsim/dp.hpp"

#include <algorithm>
#include <cmath>

#include "fedsim/error.hpp"

namespace fedsim {

DpMechanism dp_mechanism_from_string(std::string_view name) {
  if (name == "randomized_response") return DpMechanism::randomized_response;
  if (name == "laplace_score") return DpMechanism::laplace_score;
  raise(ErrorCode::invalid_config, "unknown dp mechanism '" + std::string(name) + "'");
}

std::string_view to_string(DpMechanism mechanism) {
  switch (mechanism) {
    case DpMechanism::randomized_response: return "randomized_response";
    case DpMechanism::laplace_score: return "laplace_score";
  }
  return "unknown";
}

void DpConfig::validate() const {
  if (!std::isfinite(epsilon) || !(epsilon > 0.0)) {
    raise(ErrorCode::invalid_epsilon, "epsilon must be a positive finite number");
  }
}

double rr_keep_probability(double epsilon) {
  if (!std::isfinite(epsilon) || !(epsilon > 0.0)) {
    raise(ErrorCode::invalid_epsilon, "epsilon must be a positive finite number");
  }
  // e^eps / (1 + e^eps) == 1 / (1 + e^-eps); the latter never overflows.
  return 1.0 / (1.0 + std::exp(-epsilon));
}

int randomize_label(int label, double epsilon, RngStream& rng) {
  if (label != 0 && label != 1) {
    raise(ErrorCode::invalid_score, "label must be 0 or 1, got " + std::to_string(label));
  }
  double keep = rr_keep_probability(epsilon);
  return rng.next_unit() < keep ? label : 1 - label;
}

double laplace_quantile(double u, double scale) {
  if (!(u > -0.5) || !(u < 0.5)) {
    raise(ErrorCode::invalid_score, "laplace quantile input must lie in (-0.5, 0.5)");
  }
  double sign = (u < 0.0) ? -1.0 : (u > 0.0 ? 1.0 : 0.0);
  return -scale * sign * std::log1p(-2.0 * std::abs(u));
}

double perturb_score(double score, double epsilon, RngStream& rng) {
  if (!(score >= 0.0) || !(score <= 1.0)) {
    raise(ErrorCode::invalid_score, "score must lie in [0, 1]");
  }
  if (!std::isfinite(epsilon) || !(epsilon > 0.0)) {
    raise(ErrorCode::invalid_epsilon, "epsilon must be a positive finite number");
  }
  // next_unit() is uniform on [0, 1); shift to (-0.5, 0.5) with the single
  // excluded endpoint at exactly -0.5.
  double u = rng.next_unit() - 0.5;
  while (u == -0.5) u = rng.next_unit() - 0.5;
  double noisy = score + laplace_quantile(u, 1.0 / epsilon);
  return std::clamp(noisy, 0.0, 1.0);
}

double expected_rr_accuracy(double accuracy, double epsilon) {
  if (!(accuracy >= 0.0) || !(accuracy <= 1.0)) {
    raise(ErrorCode::invalid_score, "accuracy must lie in [0, 1]");
  }
  double keep = rr_keep_probability(epsilon);
  return accuracy * keep + (1.0 - accuracy) * (1.0 - keep);
}

}  // namespace fedsim
