#include "dialweight/weighter.hpp"

#include <algorithm>
#include <numeric>

#include "dialweight/error.hpp"
#include "dialweight/layers.hpp"

namespace dialweight {

namespace {

constexpr const char* kKind = "weighter";

}  // namespace

nlohmann::json to_json(const WeighterConfig& c) {
  return {{"vocab_size", c.vocab_size},
          {"embedding_dim", c.encoder.embedding_dim},
          {"hidden_dim", c.encoder.hidden_dim},
          {"bidirectional", c.encoder.bidirectional},
          {"merge_dim", c.merge_dim},
          {"feature_dim", c.feature_dim},
          {"dropout", c.dropout}};
}

WeighterConfig weighter_config_from_json(const nlohmann::json& j) {
  try {
    WeighterConfig c;
    c.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.encoder.embedding_dim = j.at("embedding_dim").get<std::size_t>();
    c.encoder.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    c.encoder.bidirectional = j.at("bidirectional").get<bool>();
    c.merge_dim = j.at("merge_dim").get<std::size_t>();
    c.feature_dim = j.at("feature_dim").get<std::size_t>();
    c.dropout = j.at("dropout").get<double>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("weighter architecture: ") + e.what());
  }
}

struct WeightingModel::Forward {
  SequenceEncoder::Cache context;
  SequenceEncoder::Cache response;
  DenseCache merge;
  std::vector<double> merge_mask;
  DenseCache output;
};

WeightingModel::WeightingModel(const WeighterConfig& config, std::uint64_t init_seed)
    : config_(config), encoder_("embedding", "encoder", config.encoder) {
  if (config.vocab_size == 0) throw ConfigError("weighter vocab_size must be positive");
  if (config.encoder.embedding_dim == 0 || config.encoder.hidden_dim == 0 || config.merge_dim == 0) {
    throw ConfigError("weighter dimensions must be positive");
  }
  Rng rng(init_seed);
  params_.add_uniform("embedding", {config.vocab_size, config.encoder.embedding_dim}, rng);
  encoder_.add_params(params_, rng);
  const std::size_t merged = 2 * config.encoder.output_dim() + config.feature_dim;
  add_dense_params(params_, "merge", merged, config.merge_dim, rng);
  add_dense_params(params_, "output", config.merge_dim, 1, rng);
}

double WeightingModel::run(std::span<const int> context_ids, std::span<const int> response_ids,
                           std::span<const double> features, bool training, Rng& rng,
                           Forward* cache) const {
  if (features.size() != config_.feature_dim) {
    throw ConfigError("weighter expects " + std::to_string(config_.feature_dim) + " features, got " +
                      std::to_string(features.size()));
  }
  const double rate = config_.dropout;
  std::vector<double> x =
      encoder_.encode(context_ids, params_, rate, training, rng, cache ? &cache->context : nullptr);
  const std::vector<double> r =
      encoder_.encode(response_ids, params_, rate, training, rng, cache ? &cache->response : nullptr);
  x.insert(x.end(), r.begin(), r.end());
  x.insert(x.end(), features.begin(), features.end());

  DenseCache merge = dense_forward(x, params_, "merge", Activation::tanh);
  std::vector<double> mask;
  const std::vector<double> hidden = dropout(merge.output, rate, training, rng, cache ? &mask : nullptr);
  DenseCache output = dense_forward(hidden, params_, "output", Activation::identity);
  const double p = sigmoid(output.output[0]);
  if (cache) {
    cache->merge = std::move(merge);
    cache->merge_mask = std::move(mask);
    cache->output = std::move(output);
  }
  return p;
}

double WeightingModel::weight(std::span<const int> context_ids, std::span<const int> response_ids,
                              std::span<const double> features) const {
  Rng unused(0);
  const double p = run(context_ids, response_ids, features, false, unused, nullptr);
  return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon);
}

double WeightingModel::score(const EncodedPair& pair) const {
  return weight(pair.context_ids, pair.response_ids, pair.features);
}

double WeightingModel::accumulate_gradient(const EncodedPair& pair, double label, double coefficient,
                                           bool training, Rng& rng) {
  Forward f;
  const double p = run(pair.context_ids, pair.response_ids, pair.features, training, rng, &f);
  const double d_logit = coefficient * binary_cross_entropy_logit_grad(p, label);

  std::vector<double> d_hidden = dense_backward(f.output, std::span(&d_logit, 1), params_, "output");
  for (std::size_t k = 0; k < d_hidden.size(); ++k) d_hidden[k] *= f.merge_mask[k];
  const std::vector<double> dx = dense_backward(f.merge, d_hidden, params_, "merge");

  const std::size_t out = config_.encoder.output_dim();
  encoder_.backward(f.context, std::span(dx).subspan(0, out), params_);
  encoder_.backward(f.response, std::span(dx).subspan(out, out), params_);
  return p;
}

Checkpoint WeightingModel::to_checkpoint(std::uint64_t vocab_fingerprint, const RmsProp* optimizer) const {
  Checkpoint ckpt;
  ckpt.vocab_fingerprint = vocab_fingerprint;
  ckpt.metadata = {{"kind", kKind}, {"architecture", to_json(config_)}};
  ckpt.params = params_;
  ckpt.params.zero_grad();
  if (optimizer) ckpt.optimizer_state = optimizer->caches();
  return ckpt;
}

WeightingModel WeightingModel::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.metadata.value("kind", "") != kKind) {
    throw ConfigError("checkpoint holds a '" + ckpt.metadata.value("kind", "") + "' model, not a weighter");
  }
  WeightingModel model(weighter_config_from_json(ckpt.metadata.at("architecture")), 0);
  model.params_.assign_values(ckpt.params);
  return model;
}

double weighter_forward(const WeightingModel& model, std::span<const int> context_ids,
                        std::span<const int> response_ids, std::span<const double> features) {
  return model.weight(context_ids, response_ids, features);
}

std::vector<EncodedPair> sample_encoded_negatives(const std::vector<EncodedPair>& positives,
                                                  const std::vector<EncodedPair>& pool,
                                                  std::size_t ratio, Rng& rng) {
  if (pool.size() < 2) throw DataError("negative sampling needs a pool of at least 2 pairs");
  std::vector<EncodedPair> out;
  out.reserve(positives.size() * ratio);
  for (const auto& pos : positives) {
    for (std::size_t k = 0; k < ratio; ++k) {
      const EncodedPair* drawn = nullptr;
      for (int attempt = 0; attempt < 64 && !drawn; ++attempt) {
        const EncodedPair& cand = pool[rng.below(pool.size())];
        if (cand.response_ids != pos.response_ids) drawn = &cand;
      }
      if (!drawn) {
        // Nearly every pool entry repeats this response; take the first one that does not.
        for (const auto& cand : pool) {
          if (cand.response_ids != pos.response_ids) {
            drawn = &cand;
            break;
          }
        }
      }
      if (!drawn) throw DataError("no pool response differs from the positive's response");

      EncodedPair neg = pos;
      neg.response_ids = drawn->response_ids;
      for (std::size_t f = 0; f < 2 && f < neg.features.size() && f < drawn->features.size(); ++f) {
        neg.features[f] = drawn->features[f];
      }
      neg.label = 0;
      out.push_back(std::move(neg));
    }
  }
  return out;
}

WeighterTrainingResult train_weighter(const std::vector<EncodedPair>& positives,
                                      const std::vector<EncodedPair>& pool,
                                      const WeighterTrainingConfig& config, std::uint64_t seed) {
  if (positives.empty()) throw DataError("weighter training needs at least one positive pair");
  if (!(config.validation_fraction >= 0.0 && config.validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must be in [0, 1)");
  }

  Rng sample_rng(derive_seed(seed, "sample"));
  const std::vector<EncodedPair> negatives =
      sample_encoded_negatives(positives, pool, config.negative_ratio, sample_rng);

  std::vector<TrainingExample> examples;
  examples.reserve(positives.size() + negatives.size());
  for (const auto& p : positives) examples.push_back({p, 1, 1.0});
  for (const auto& n : negatives) examples.push_back({n, 0, 1.0});
  for (auto& ex : examples) {
    ex.pair.label = ex.label;
    ex.pair.weight.reset();
  }

  Rng split_rng(derive_seed(seed, "split"));
  split_rng.shuffle(examples);
  const auto held_out = static_cast<std::size_t>(config.validation_fraction * static_cast<double>(examples.size()));
  std::vector<TrainingExample> validation(examples.begin(), examples.begin() + static_cast<std::ptrdiff_t>(held_out));
  examples.erase(examples.begin(), examples.begin() + static_cast<std::ptrdiff_t>(held_out));

  WeightingModel model(config.model, derive_seed(seed, "init"));
  TrainerConfig trainer = config.trainer;
  trainer.seed = derive_seed(seed, "train");
  RmsProp optimizer(trainer.optimizer);
  TrainingLog log = train_classifier(model, std::move(examples), validation, trainer, &optimizer);
  return {std::move(model), std::move(log), std::move(optimizer), std::move(validation)};
}

std::vector<EncodedPair> assign_weights(const WeightingModel& model, std::uint64_t model_vocab_fingerprint,
                                        std::uint64_t pairs_vocab_fingerprint,
                                        const std::vector<EncodedPair>& pairs) {
  if (model_vocab_fingerprint != pairs_vocab_fingerprint) {
    throw FingerprintMismatch("vocabulary fingerprint mismatch: model " + hex64(model_vocab_fingerprint) +
                              ", pairs " + hex64(pairs_vocab_fingerprint));
  }
  std::vector<EncodedPair> out = pairs;
  for (auto& p : out) p.weight = model.score(p);
  return out;
}

}  // namespace dialweight
