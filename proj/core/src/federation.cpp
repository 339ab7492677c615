#include "fedsim/federation.hpp"

#include <cmath>
#include <future>

#include "fedsim/error.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

void FederationConfig::validate() const {
  if (k_clients < 1) raise(ErrorCode::invalid_config, "k_clients must be >= 1");
  if (rounds < 1) raise(ErrorCode::invalid_config, "rounds must be >= 1");
  gbdt.validate();
  if (gbdt.trees_total % rounds != 0) {
    raise(ErrorCode::invalid_config, "gbdt.trees_total (" + std::to_string(gbdt.trees_total) +
                                         ") must be divisible by rounds (" +
                                         std::to_string(rounds) + ")");
  }
  smote.validate();
  dp.validate();
  if (!(decision_threshold > 0.0) || !(decision_threshold < 1.0)) {
    raise(ErrorCode::invalid_config, "decision_threshold must lie in (0, 1)");
  }
}

std::vector<double> compute_weights(std::span<const double> f1_scores,
                                    std::span<const std::int64_t> train_sizes) {
  if (f1_scores.size() != train_sizes.size()) {
    raise(ErrorCode::length_mismatch, std::to_string(f1_scores.size()) + " scores vs " +
                                          std::to_string(train_sizes.size()) + " sizes");
  }
  if (f1_scores.empty()) raise(ErrorCode::empty_input, "no clients to weight");

  std::vector<double> mass(f1_scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < f1_scores.size(); ++i) {
    double f = f1_scores[i];
    if (!std::isfinite(f) || f < 0.0 || f > 1.0) {
      raise(ErrorCode::invalid_score, "f1 score must lie in [0, 1]");
    }
    if (train_sizes[i] <= 0) {
      raise(ErrorCode::invalid_score, "client training size must be positive");
    }
    mass[i] = f * static_cast<double>(train_sizes[i]);
    total += mass[i];
  }
  if (total <= 0.0) {
    raise(ErrorCode::all_zero_mass, "every client has zero f1*size mass");
  }
  for (double& m : mass) m /= total;
  return mass;
}

std::pair<double, int> aggregate_predict(std::span<const GbdtModel> models,
                                         std::span<const double> weights,
                                         std::span<const double> x, double threshold) {
  if (models.size() != weights.size()) {
    raise(ErrorCode::length_mismatch, std::to_string(models.size()) + " models vs " +
                                          std::to_string(weights.size()) + " weights");
  }
  if (models.empty()) raise(ErrorCode::empty_input, "no models to aggregate");
  double score = 0.0;
  for (std::size_t i = 0; i < models.size(); ++i) {
    score += weights[i] * predict_proba(models[i], x);
  }
  return {score, score >= threshold ? 1 : 0};
}

namespace {

Evaluation finish_evaluation(Evaluation eval, const Dataset& test) {
  eval.counts = confusion(test.labels, eval.preds);
  eval.accuracy = accuracy(eval.counts);
  eval.f1 = f1(eval.counts);
  return eval;
}

}  // namespace

Evaluation evaluate_model(const GbdtModel& model, const Dataset& test, double threshold) {
  if (test.n_rows() == 0) raise(ErrorCode::empty_input, "empty test split");
  Evaluation eval;
  eval.probs.reserve(test.n_rows());
  eval.preds.reserve(test.n_rows());
  for (std::size_t i = 0; i < test.n_rows(); ++i) {
    double p = predict_proba(model, test.row(i));
    eval.probs.push_back(p);
    eval.preds.push_back(p >= threshold ? 1 : 0);
  }
  return finish_evaluation(std::move(eval), test);
}

Evaluation evaluate_ensemble(std::span<const GbdtModel> models, std::span<const double> weights,
                             const Dataset& test, double threshold) {
  if (test.n_rows() == 0) raise(ErrorCode::empty_input, "empty test split");
  Evaluation eval;
  eval.probs.reserve(test.n_rows());
  eval.preds.reserve(test.n_rows());
  for (std::size_t i = 0; i < test.n_rows(); ++i) {
    auto [score, label] = aggregate_predict(models, weights, test.row(i), threshold);
    eval.probs.push_back(score);
    eval.preds.push_back(label);
  }
  return finish_evaluation(std::move(eval), test);
}

Evaluation apply_dp(const Evaluation& base, const Dataset& test, const DpConfig& dp,
                    double threshold, RngStream& rng) {
  Evaluation out;
  out.probs.reserve(base.probs.size());
  out.preds.reserve(base.preds.size());
  switch (dp.mechanism) {
    case DpMechanism::randomized_response:
      out.probs = base.probs;
      for (int pred : base.preds) {
        out.preds.push_back(randomize_label(pred, dp.epsilon, rng));
      }
      break;
    case DpMechanism::laplace_score:
      for (double p : base.probs) {
        double noisy = perturb_score(p, dp.epsilon, rng);
        out.probs.push_back(noisy);
        out.preds.push_back(noisy >= threshold ? 1 : 0);
      }
      break;
  }
  return finish_evaluation(std::move(out), test);
}

FederationState setup_federation(const Dataset& train, const Dataset& test,
                                 const FederationConfig& cfg) {
  cfg.validate();
  FederationState st;
  st.cfg = cfg;
  st.test = test;
  st.shards = partition_clients(train, cfg.k_clients, cfg.master_seed);
  st.client_train.reserve(st.shards.size());
  for (const ClientPartition& shard : st.shards) {
    SmoteConfig smote = cfg.smote;
    smote.seed = derive_seed(cfg.master_seed, "smote", static_cast<std::uint64_t>(shard.client_id));
    st.client_train.push_back(oversample(shard.data, smote));
  }
  st.keys = session_keys(cfg.k_clients, cfg.master_seed);
  st.models.resize(static_cast<std::size_t>(cfg.k_clients));
  st.roundtrip_identical.assign(static_cast<std::size_t>(cfg.k_clients), 1);
  return st;
}

RoundRecord run_round(FederationState& st) {
  const FederationConfig& cfg = st.cfg;
  const auto k = static_cast<std::size_t>(cfg.k_clients);
  const int r = st.next_round;
  const int trees_per_round = cfg.gbdt.trees_total / cfg.rounds;

  struct Update {
    GbdtModel model;
    std::string payload;
    std::string token;
  };

  auto client_task = [&st, &cfg, r, trees_per_round, k](std::size_t i) -> Update {
    std::optional<GbdtModel> base = st.models[i];
    GbdtModel model =
        train_increment(std::move(base), st.client_train[i], cfg.gbdt, trees_per_round,
                        derive_seed(cfg.master_seed, "train", static_cast<std::uint64_t>(i)));
    std::string payload = serialize(model);
    std::string token;
    if (cfg.encryption_enabled) {
      std::array<std::uint8_t, 16> iv{};
      RngStream iv_rng = RngStream::derive(cfg.master_seed, "iv",
                                           static_cast<std::uint64_t>(r) * k + i);
      iv_rng.fill_bytes(iv);
      token = encrypt(st.keys[i],
                      std::span(reinterpret_cast<const std::uint8_t*>(payload.data()),
                                payload.size()),
                      round_timestamp(r), iv);
    }
    return {std::move(model), std::move(payload), std::move(token)};
  };

  std::vector<Update> updates(k);
  if (cfg.parallel_clients && k > 1) {
    std::vector<std::future<Update>> futures;
    futures.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
      futures.push_back(std::async(std::launch::async, client_task, i));
    }
    for (std::size_t i = 0; i < k; ++i) updates[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < k; ++i) updates[i] = client_task(i);
  }

  RoundRecord rec;
  rec.round_index = r;
  rec.per_client.reserve(k);

  std::vector<GbdtModel> received;
  received.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::string bytes;
    std::size_t token_len = 0;
    if (cfg.encryption_enabled) {
      std::string token = updates[i].token;
      if (st.transit_tamper) st.transit_tamper(static_cast<int>(i), token);
      token_len = token.size();
      std::vector<std::uint8_t> plain;
      try {
        plain = decrypt(st.keys[i], token, std::nullopt, round_timestamp(r));
      } catch (const Error& e) {
        throw Error(ErrorCode::crypto_failure,
                    "client " + std::to_string(i) + " update rejected: " + e.what());
      }
      bytes.assign(plain.begin(), plain.end());
    } else {
      bytes = updates[i].payload;
    }
    if (bytes != updates[i].payload) st.roundtrip_identical[i] = 0;

    GbdtModel model;
    try {
      model = deserialize(bytes);
    } catch (const Error& e) {
      throw Error(ErrorCode::crypto_failure,
                  "client " + std::to_string(i) + " update rejected: " + e.what());
    }

    Evaluation eval = evaluate_model(model, st.test, cfg.decision_threshold);
    rec.per_client.push_back(
        {static_cast<int>(i), eval.accuracy, eval.f1, updates[i].payload.size(), token_len});
    received.push_back(std::move(model));
  }

  std::vector<double> f1_scores;
  std::vector<std::int64_t> sizes;
  f1_scores.reserve(k);
  sizes.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    f1_scores.push_back(rec.per_client[i].f1);
    sizes.push_back(received[i].n_train);
  }
  rec.weights = compute_weights(f1_scores, sizes);

  Evaluation global = evaluate_ensemble(received, rec.weights, st.test, cfg.decision_threshold);
  rec.global_accuracy = global.accuracy;
  rec.global_f1 = global.f1;

  RngStream dp_rng = RngStream::derive(cfg.master_seed, "dp_round", static_cast<std::uint64_t>(r));
  Evaluation noisy = apply_dp(global, st.test, cfg.dp, cfg.decision_threshold, dp_rng);
  rec.dp_global_accuracy = noisy.accuracy;
  rec.dp_global_f1 = noisy.f1;

  for (std::size_t i = 0; i < k; ++i) st.models[i] = std::move(updates[i].model);
  st.next_round = r + 1;
  return rec;
}

}  // namespace fedsim
