#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "dialweight/checkpoint.hpp"
#include "dialweight/encoder.hpp"
#include "dialweight/training.hpp"

namespace dialweight {

struct WeighterConfig {
  std::size_t vocab_size = 0;
  EncoderShape encoder;
  std::size_t merge_dim = 128;
  std::size_t feature_dim = 2;  // length of EncodedPair::features
  double dropout = 0.2;
};

nlohmann::json to_json(const WeighterConfig& c);
WeighterConfig weighter_config_from_json(const nlohmann::json& j);

// Context and response run through the SAME encoder parameters:
//
//   c = enc(context)   r = enc(response)
//   m = tanh(W_m [c; r; features] + b_m)
//   w = sigmoid(W_o m + b_o)
//
// Parameters: "embedding", "encoder.*", "merge.*", "output.*".
class WeightingModel : public PairScorer {
 public:
  WeightingModel(const WeighterConfig& config, std::uint64_t init_seed);

  // Inference mode. The result is clamped into [1e-7, 1 - 1e-7] so it is a
  // valid, strictly positive example weight. Throws ConfigError when the
  // feature vector has the wrong length.
  double weight(std::span<const int> context_ids, std::span<const int> response_ids,
                std::span<const double> features) const;

  double score(const EncodedPair& pair) const override;
  double accumulate_gradient(const EncodedPair& pair, double label, double coefficient, bool training,
                             Rng& rng) override;

  ParamSet& params() override { return params_; }
  const ParamSet& params() const override { return params_; }
  const WeighterConfig& config() const { return config_; }

  Checkpoint to_checkpoint(std::uint64_t vocab_fingerprint, const RmsProp* optimizer = nullptr) const;
  // Throws ConfigError for a checkpoint of another model kind.
  static WeightingModel from_checkpoint(const Checkpoint& ckpt);

 private:
  struct Forward;
  double run(std::span<const int> context_ids, std::span<const int> response_ids,
             std::span<const double> features, bool training, Rng& rng, Forward* cache) const;

  WeighterConfig config_;
  SequenceEncoder encoder_;
  ParamSet params_;
};

// Convenience wrapper matching the inference signature of the model.
double weighter_forward(const WeightingModel& model, std::span<const int> context_ids,
                        std::span<const int> response_ids, std::span<const double> features);

// Label-0 copies of each positive whose response (ids and gap features) is
// drawn uniformly from `pool`, never equal in ids to the positive's own
// response. Document-level features stay with the context. Throws DataError
// when the pool has fewer than 2 entries or no usable response.
std::vector<EncodedPair> sample_encoded_negatives(const std::vector<EncodedPair>& positives,
                                                  const std::vector<EncodedPair>& pool,
                                                  std::size_t ratio, Rng& rng);

struct WeighterTrainingConfig {
  WeighterConfig model;
  TrainerConfig trainer = [] {
    TrainerConfig t;
    t.patience = 3;
    return t;
  }();
  double validation_fraction = 0.1;
  std::size_t negative_ratio = 1;
};

struct WeighterTrainingResult {
  WeightingModel model;
  TrainingLog log;
  RmsProp optimizer;
  std::vector<TrainingExample> validation;
};

// Samples negatives 1:ratio, holds out a seeded validation split and trains
// the classifier. Seeds: "init", "sample", "split" and "train" under `seed`.
// Throws DataError on empty positives.
WeighterTrainingResult train_weighter(const std::vector<EncodedPair>& positives,
                                      const std::vector<EncodedPair>& pool,
                                      const WeighterTrainingConfig& config, std::uint64_t seed);

// One weight per pair in input order; the pairs are otherwise unchanged.
// Throws FingerprintMismatch when the model was trained against a different
// vocabulary than the one that encoded the pairs.
std::vector<EncodedPair> assign_weights(const WeightingModel& model, std::uint64_t model_vocab_fingerprint,
                                        std::uint64_t pairs_vocab_fingerprint,
                                        const std::vector<EncodedPair>& pairs);

}  // namespace dialweight
