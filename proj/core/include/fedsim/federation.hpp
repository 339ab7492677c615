#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/dp.hpp"
#include "fedsim/fernet.hpp"
#include "fedsim/gbdt.hpp"
#include "fedsim/metrics.hpp"
#include "fedsim/smote.hpp"

namespace fedsim {

struct FederationConfig {
  int k_clients = 3;
  int rounds = 5;
  std::uint64_t master_seed = 42;
  GbdtHyper gbdt;
  SmoteConfig smote;  // seed field is ignored; per-client seeds derive from master_seed
  DpConfig dp;        // likewise
  bool encryption_enabled = true;
  double decision_threshold = 0.5;
  bool parallel_clients = true;  // execution detail only; outputs never depend on it

  void validate() const;
};

// Tokens carry a logical clock so runs replay exactly: round r is stamped
// kLogicalTimeBase + r.
constexpr std::uint64_t kLogicalTimeBase = 1600000000;
inline std::uint64_t round_timestamp(int round_index) {
  return kLogicalTimeBase + static_cast<std::uint64_t>(round_index);
}

// Normalized per-client aggregation masses w_i = f1_i * n_i / sum_j f1_j * n_j.
std::vector<double> compute_weights(std::span<const double> f1_scores,
                                    std::span<const std::int64_t> train_sizes);

// Weighted ensemble probability and thresholded label for one input row.
std::pair<double, int> aggregate_predict(std::span<const GbdtModel> models,
                                         std::span<const double> weights,
                                         std::span<const double> x, double threshold);

struct Evaluation {
  ConfusionCounts counts;
  double accuracy = 0.0;
  double f1 = 0.0;
  std::vector<double> probs;
  std::vector<int> preds;
};

Evaluation evaluate_model(const GbdtModel& model, const Dataset& test, double threshold);
Evaluation evaluate_ensemble(std::span<const GbdtModel> models, std::span<const double> weights,
                             const Dataset& test, double threshold);

// Re-score an evaluation through the configured privacy mechanism.
Evaluation apply_dp(const Evaluation& base, const Dataset& test, const DpConfig& dp,
                    double threshold, RngStream& rng);

struct ClientRoundMetrics {
  int client_id = 0;
  double accuracy = 0.0;
  double f1 = 0.0;
  std::size_t model_bytes_len = 0;
  std::size_t token_len = 0;  // 0 when encryption is disabled
};

struct RoundRecord {
  int round_index = 0;
  std::vector<ClientRoundMetrics> per_client;
  std::vector<double> weights;
  double global_accuracy = 0.0;
  double global_f1 = 0.0;
  double dp_global_accuracy = 0.0;
  double dp_global_f1 = 0.0;
};

struct FederationState {
  FederationConfig cfg;
  Dataset test;
  std::vector<ClientPartition> shards;  // client data before oversampling
  std::vector<Dataset> client_train;    // after oversampling
  std::vector<SecretKey> keys;
  std::vector<std::optional<GbdtModel>> models;
  int next_round = 0;
  std::vector<char> roundtrip_identical;  // per client: decrypted bytes matched sent bytes so far

  // Test hook: mutate a client's token in transit before the server sees it.
  std::function<void(int client_id, std::string& token)> transit_tamper;
};

// Splits `train` into client shards, oversamples each, and derives one
// encryption key per client.
FederationState setup_federation(const Dataset& train, const Dataset& test,
                                 const FederationConfig& cfg);

// One federated round: every client grows trees_total/rounds trees on its
// local data, serializes, encrypts and ships its model; the server verifies,
// decrypts, evaluates each update on the held-out test split, recomputes
// aggregation weights and scores the weighted ensemble with and without the
// privacy mechanism.
RoundRecord run_round(FederationState& state);

}  // namespace fedsim
