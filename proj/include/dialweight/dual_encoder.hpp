#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "dialweight/checkpoint.hpp"
#include "dialweight/encoder.hpp"
#include "dialweight/training.hpp"

namespace dialweight {

struct DualEncoderConfig {
  std::size_t vocab_size = 0;
  EncoderShape encoder;
  std::size_t projection_dim = 64;  // size of c' and r'
  double dropout = 0.2;
};

nlohmann::json to_json(const DualEncoderConfig& c);
DualEncoderConfig dual_encoder_config_from_json(const nlohmann::json& j);

// Separate encoders for context and response over one embedding table:
//
//   c' = tanh(W_c enc_c(context) + b_c)
//   r' = tanh(W_r enc_r(response) + b_r)
//   s  = sigmoid(W_f [<c', r'>; r'] + b_f)
//
// Parameters: "embedding", "context_encoder.*", "response_encoder.*",
// "context_dense.*", "response_dense.*", "final.*".
class DualEncoder : public PairScorer {
 public:
  DualEncoder(const DualEncoderConfig& config, std::uint64_t init_seed);

  double score(std::span<const int> context_ids, std::span<const int> response_ids) const;
  double score(const EncodedPair& pair) const override;
  // The pre-sigmoid score. Ranks like score() but does not saturate to ties.
  double logit(std::span<const int> context_ids, std::span<const int> response_ids) const;
  double accumulate_gradient(const EncodedPair& pair, double label, double coefficient, bool training,
                             Rng& rng) override;

  ParamSet& params() override { return params_; }
  const ParamSet& params() const override { return params_; }
  const DualEncoderConfig& config() const { return config_; }

  Checkpoint to_checkpoint(std::uint64_t vocab_fingerprint, const RmsProp* optimizer = nullptr) const;
  static DualEncoder from_checkpoint(const Checkpoint& ckpt);

 private:
  struct Forward;
  double run(std::span<const int> context_ids, std::span<const int> response_ids, bool training, Rng& rng,
             Forward* cache) const;

  DualEncoderConfig config_;
  SequenceEncoder context_encoder_;
  SequenceEncoder response_encoder_;
  ParamSet params_;
};

double dual_encoder_score(const DualEncoder& model, std::span<const int> context_ids,
                          std::span<const int> response_ids);

struct DualEncoderTrainingResult {
  DualEncoder model;
  TrainingLog log;
  RmsProp optimizer;
};

// Trains from labeled examples (weights of 1.0 for the unweighted model).
// Seeds: "init" and "train" under `seed`. `initial_embeddings`, when given,
// replaces the randomly initialised embedding table before training.
DualEncoderTrainingResult train_dual_encoder(const std::vector<TrainingExample>& train,
                                             const std::vector<TrainingExample>& validation,
                                             const DualEncoderConfig& model_config,
                                             const TrainerConfig& trainer, std::uint64_t seed,
                                             const Tensor* initial_embeddings = nullptr);

}  // namespace dialweight
