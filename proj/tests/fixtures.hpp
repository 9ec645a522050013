#pragma once

// Small models and random encoded pairs shared by the unit and acceptance
// tests.

#include <vector>

#include "dialweight/dual_encoder.hpp"
#include "dialweight/rng.hpp"
#include "dialweight/training.hpp"
#include "dialweight/weighter.hpp"

namespace dialweight::testing {

inline constexpr std::size_t kToyVocab = 12;

inline WeighterConfig toy_weighter_config(std::size_t feature_dim = 3) {
  WeighterConfig c;
  c.vocab_size = kToyVocab;
  c.encoder = {4, 5, false};
  c.merge_dim = 6;
  c.feature_dim = feature_dim;
  c.dropout = 0.2;
  return c;
}

inline DualEncoderConfig toy_dual_encoder_config() {
  DualEncoderConfig c;
  c.vocab_size = kToyVocab;
  c.encoder = {4, 5, false};
  c.projection_dim = 3;
  c.dropout = 0.2;
  return c;
}

inline std::vector<int> random_ids(Rng& rng, std::size_t vocab, std::size_t max_len) {
  std::vector<int> ids(1 + rng.below(max_len));
  for (int& id : ids) id = static_cast<int>(rng.below(vocab));
  return ids;
}

inline EncodedPair random_pair(Rng& rng, std::size_t vocab = kToyVocab, std::size_t feature_dim = 3,
                               std::size_t max_len = 5) {
  EncodedPair p;
  p.context_ids = random_ids(rng, vocab, max_len);
  p.response_ids = random_ids(rng, vocab, max_len);
  for (std::size_t k = 0; k < feature_dim; ++k) p.features.push_back(rng.uniform(-1.0, 1.0));
  p.source_id = "toy";
  return p;
}

inline std::vector<TrainingExample> random_batch(Rng& rng, std::size_t n, std::size_t feature_dim = 3) {
  std::vector<TrainingExample> batch;
  for (std::size_t i = 0; i < n; ++i) {
    TrainingExample ex;
    ex.pair = random_pair(rng, kToyVocab, feature_dim);
    ex.label = static_cast<int>(rng.below(2));
    ex.weight = rng.uniform(0.05, 1.0);
    batch.push_back(ex);
  }
  return batch;
}

}  // namespace dialweight::testing
