#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dialweight/corpus.hpp"
#include "dialweight/dual_encoder.hpp"
#include "dialweight/preprocess.hpp"
#include "dialweight/synth.hpp"
#include "dialweight/weighter.hpp"

namespace dialweight {

struct EvalSettings {
  std::size_t m = 10;
  std::vector<std::size_t> at = {1, 2, 5};
  bool questions_only = false;
};

struct DualEncoderSettings {
  DualEncoderConfig model;  // vocab_size is taken from the vocabulary at training time
  TrainerConfig trainer;
  std::size_t negative_ratio = 1;
  bool use_weights = true;
  std::optional<std::filesystem::path> pretrained_embeddings;
};

// Everything a pipeline run can be configured with. The file form is INI:
//
//   [corpus]        max_gap_ms, mode (utterance|turn), context_window,
//                   genres (comma list), duration_feature
//   [preprocess]    vocab_cap, context_utterances, context_tokens,
//                   response_utterances, response_tokens
//   [weighter]      embedding_dim, hidden_dim, bidirectional, merge_dim,
//                   dropout, epochs, batch_size, learning_rate, decay,
//                   epsilon, patience, validation_fraction, negative_ratio
//   [dual_encoder]  embedding_dim, hidden_dim, bidirectional,
//                   projection_dim, dropout, epochs, batch_size,
//                   learning_rate, decay, epsilon, patience, reduction
//                   (weighted_mean|sum), curve_every, negative_ratio,
//                   use_weights, pretrained_embeddings
//   [eval]          m, at (comma list), questions_only
//   [synth]         dialogues, high_quality_fraction, noise_fraction,
//                   noise_types (comma list), topics, words_per_topic,
//                   echo_probability, validation_dialogues, test_dialogues
//
// Unknown sections or keys and out-of-range values raise ConfigError.
struct PipelineConfig {
  std::int64_t max_gap_ms = kDefaultMaxGapMs;
  ExtractionConfig extraction;
  std::size_t vocab_cap = kDefaultVocabCap;
  TruncationLimits limits;
  WeighterTrainingConfig weighter;
  DualEncoderSettings dual_encoder;
  EvalSettings eval;
  SynthConfig synth;
};

PipelineConfig default_config();
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace dialweight
