#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "fedsim/rng.hpp"

namespace fedsim {

enum class DpMechanism {
  randomized_response,  // flip the predicted label with probability 1/(1+e^eps)
  laplace_score,        // add Laplace(1/eps) noise to the probability score
};

DpMechanism dp_mechanism_from_string(std::string_view name);
std::string_view to_string(DpMechanism mechanism);

struct DpConfig {
  double epsilon = 3.5;
  DpMechanism mechanism = DpMechanism::randomized_response;
  std::uint64_t seed = 0;

  void validate() const;  // throws InvalidEpsilon
};

// Probability that randomized response keeps the true label:
// e^eps / (1 + e^eps), evaluated stably for large eps.
double rr_keep_probability(double epsilon);

int randomize_label(int label, double epsilon, RngStream& rng);

// Inverse-CDF sample of Laplace(scale) from u in (-0.5, 0.5):
// -scale * sign(u) * ln(1 - 2|u|).
double laplace_quantile(double u, double scale);

// Add Laplace(1/epsilon) noise to a probability score, clamped back to
// [0, 1].
double perturb_score(double score, double epsilon, RngStream& rng);

// Closed-form accuracy after randomized response:
// acc * p_keep + (1 - acc) * (1 - p_keep).
double expected_rr_accuracy(double accuracy, double epsilon);

}  // namespace fedsim
