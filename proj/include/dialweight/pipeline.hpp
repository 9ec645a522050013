#pragma once

// Glue between the modules: the steps the command-line tool runs, as plain
// functions over in-memory data so they can be tested and timed directly.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dialweight/config.hpp"
#include "dialweight/corpus.hpp"
#include "dialweight/dual_encoder.hpp"
#include "dialweight/eval.hpp"
#include "dialweight/preprocess.hpp"
#include "dialweight/tfidf.hpp"

namespace dialweight {

struct PreparedCorpus {
  std::vector<DialoguePair> pairs;         // every extracted pair, entities anonymized
  std::vector<DialoguePair> high_quality;  // the subset passing the heuristics, anonymized
  Vocabulary vocab;
  // Counts only; file fingerprints are added by the caller that writes files.
  nlohmann::json manifest;
};

// Anonymizes and segments every dialogue, extracts pairs and selects the
// high-quality subset. Selection sees the raw tokens so cast names are
// still recognisable; the vocabulary is built from anonymized tokens unless
// `fixed_vocab` is given.
PreparedCorpus prepare_corpus(const std::vector<Dialogue>& dialogues, const PipelineConfig& config,
                              const Vocabulary* fixed_vocab = nullptr);

// Rejection reason without the offending token, e.g. "character name".
std::string rejection_category(const std::string& reason);

TfIdfIndex build_tfidf_index(const std::vector<EncodedPair>& pairs, const Vocabulary& vocab);

// Positives followed by `ratio` sampled negatives each. With `use_weights`
// a pair's weight (if any) carries over to its negatives; otherwise every
// example weighs 1.
std::vector<TrainingExample> conversation_examples(const std::vector<EncodedPair>& positives,
                                                   const std::vector<EncodedPair>& pool, std::size_t ratio,
                                                   bool use_weights, std::uint64_t seed);

EvalTask make_eval_task(const std::vector<EncodedPair>& queries, const std::vector<EncodedPair>& pool,
                        const EvalSettings& settings, const Vocabulary& vocab, std::uint64_t seed);

ResponseScorer tfidf_scorer(const TfIdfIndex& index, const Vocabulary& vocab);
ResponseScorer dual_encoder_scorer(const DualEncoder& model);

}  // namespace dialweight
