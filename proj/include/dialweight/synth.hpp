#pragma once

// Synthetic dialogue corpora with planted structure.
//
// Every synthetic dialogue has exactly two utterances, so it yields exactly
// one <context, response> pair. Each dialogue is generated as one of:
//
//   planted        two annotated speakers, a genuine reply, no names, a
//                  1500-8000 ms gap: passes every quality heuristic
//   genuine        a genuine reply without speaker annotation
//   continuation   the same speaker keeps talking after a 0-250 ms pause,
//                  with a reply about a randomly chosen other topic
//   entity         a reply that names a cast member and answers a randomly
//                  chosen other topic
//   dull           a generic reply that fits any question
//
// Only "planted" dialogues satisfy the heuristics, so the selector's expected
// output is known exactly. Genuine replies draw their content words from the
// answer lexicon of the question's topic and sometimes echo a question word.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dialweight/corpus.hpp"

namespace dialweight {

enum class SynthKind { planted, genuine, continuation, entity, dull };

std::string to_string(SynthKind k);

struct SynthConfig {
  std::size_t dialogues = 10000;
  double high_quality_fraction = 0.1;
  double noise_fraction = 0.3;
  // Noise types in use; the noise budget is split evenly among them.
  std::vector<SynthKind> noise_types = {SynthKind::continuation, SynthKind::entity, SynthKind::dull};
  std::size_t topics = 20;
  std::size_t words_per_topic = 8;
  double echo_probability = 0.3;
  // Held-out sets made only of annotated genuine dialogues.
  std::size_t validation_dialogues = 1000;
  std::size_t test_dialogues = 2000;
};

// Exact per-kind counts for a corpus of `config.dialogues` dialogues.
struct SynthPlan {
  std::map<SynthKind, std::size_t> counts;
  std::size_t total() const;
};

// Throws ConfigError when fractions fall outside [0, 1] or exceed the corpus.
SynthPlan plan_corpus(const SynthConfig& config);

struct SynthCorpus {
  std::vector<Dialogue> corpus;
  std::vector<Dialogue> validation;
  std::vector<Dialogue> test;
  std::vector<SynthKind> kinds;  // parallel to corpus
  SynthPlan plan;
};

SynthCorpus generate_corpus(const SynthConfig& config, std::uint64_t seed);

// {"plan": {...}, "kinds": {"<dialogue id>": "<kind>", ...}}
nlohmann::json ground_truth_json(const SynthCorpus& c);

}  // namespace dialweight
