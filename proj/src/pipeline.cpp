#include "dialweight/pipeline.hpp"

#include "dialweight/checkpoint.hpp"
#include "dialweight/error.hpp"
#include "dialweight/rng.hpp"
#include "dialweight/weighter.hpp"

namespace dialweight {

std::string rejection_category(const std::string& reason) {
  std::string out = reason.substr(0, reason.find('\''));
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

PreparedCorpus prepare_corpus(const std::vector<Dialogue>& dialogues, const PipelineConfig& config,
                              const Vocabulary* fixed_vocab) {
  PreparedCorpus out;
  std::vector<DialoguePair> raw_pairs;
  CastLists cast;
  std::size_t segments = 0;
  std::size_t untimed = 0;

  for (const auto& dialogue : dialogues) {
    const Segmentation raw = segment_subdialogues(dialogue, config.max_gap_ms);
    const Segmentation anon = segment_subdialogues(anonymize_dialogue(dialogue), config.max_gap_ms);
    segments += raw.segments.size();
    if (raw.timestamps_missing) ++untimed;
    for (std::size_t s = 0; s < raw.segments.size(); ++s) {
      auto raw_segment_pairs = extract_pairs(raw.segments[s], config.extraction);
      auto anon_segment_pairs = extract_pairs(anon.segments[s], config.extraction);
      cast[raw.segments[s].id] = cast_names(raw.segments[s]);
      for (auto& p : raw_segment_pairs) raw_pairs.push_back(std::move(p));
      for (auto& p : anon_segment_pairs) out.pairs.push_back(std::move(p));
    }
  }

  if (fixed_vocab) {
    out.vocab = *fixed_vocab;
  } else {
    TokenCounts counts;
    for (const auto& dialogue : dialogues) {
      for (const auto& u : anonymize_dialogue(dialogue).utterances) count_tokens(u.tokens, counts);
    }
    out.vocab = build_vocabulary(counts, config.vocab_cap);
  }

  static const std::vector<std::string> kNoCast;
  std::map<std::string, std::size_t> rejections;
  for (std::size_t i = 0; i < raw_pairs.size(); ++i) {
    auto it = cast.find(raw_pairs[i].source_id);
    const auto why = quality_violation(raw_pairs[i], out.vocab, it == cast.end() ? kNoCast : it->second);
    if (why) {
      ++rejections[rejection_category(*why)];
    } else {
      out.high_quality.push_back(out.pairs[i]);
    }
  }

  out.manifest = {
      {"dialogues", dialogues.size()},
      {"segments", segments},
      {"dialogues_without_timestamps", untimed},
      {"pairs", out.pairs.size()},
      {"high_quality", out.high_quality.size()},
      {"rejections", rejections},
      {"vocab_size", out.vocab.size()},
      {"vocab_fingerprint", hex64(out.vocab.fingerprint())},
  };
  return out;
}

TfIdfIndex build_tfidf_index(const std::vector<EncodedPair>& pairs, const Vocabulary& vocab) {
  TfIdfIndex index;
  for (const auto& p : pairs) index.add_document(decode_ids(p.response_ids, vocab));
  return index;
}

std::vector<TrainingExample> conversation_examples(const std::vector<EncodedPair>& positives,
                                                   const std::vector<EncodedPair>& pool, std::size_t ratio,
                                                   bool use_weights, std::uint64_t seed) {
  if (positives.empty()) return {};
  std::vector<EncodedPair> source = positives;
  for (auto& p : source) {
    p.label = 1;
    if (!use_weights) p.weight.reset();
  }
  Rng rng(derive_seed(seed, "sample"));
  const auto negatives = sample_encoded_negatives(source, pool, ratio, rng);

  std::vector<TrainingExample> out;
  out.reserve(source.size() * (ratio + 1));
  for (std::size_t i = 0; i < source.size(); ++i) {
    out.push_back({source[i], 1, source[i].weight.value_or(1.0)});
    for (std::size_t r = 0; r < ratio; ++r) {
      const auto& neg = negatives[i * ratio + r];
      out.push_back({neg, 0, neg.weight.value_or(1.0)});
    }
  }
  return out;
}

EvalTask make_eval_task(const std::vector<EncodedPair>& queries, const std::vector<EncodedPair>& pool,
                        const EvalSettings& settings, const Vocabulary& vocab, std::uint64_t seed) {
  std::vector<EncodedPair> kept;
  for (const auto& q : queries) {
    if (!settings.questions_only || context_ends_with_question(q.context_ids, vocab)) kept.push_back(q);
  }
  std::vector<std::vector<int>> responses;
  responses.reserve(pool.size());
  for (const auto& p : pool) responses.push_back(p.response_ids);
  return build_candidate_sets(kept, responses, settings.m, settings.at, seed);
}

ResponseScorer tfidf_scorer(const TfIdfIndex& index, const Vocabulary& vocab) {
  return [&index, &vocab](const std::vector<int>& context, const std::vector<int>& response) {
    return tfidf_similarity(decode_ids(context, vocab), decode_ids(response, vocab), index);
  };
}

ResponseScorer dual_encoder_scorer(const DualEncoder& model) {
  return [&model](const std::vector<int>& context, const std::vector<int>& response) {
    return model.logit(context, response);
  };
}

}  // namespace dialweight
