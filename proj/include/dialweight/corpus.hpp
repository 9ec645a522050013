#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "dialweight/rng.hpp"

namespace dialweight {

class Vocabulary;

enum class EntityClass { person, location, number };

std::string to_string(EntityClass c);
EntityClass entity_class_from_string(const std::string& s);

// Half-open token range [start, end).
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  EntityClass cls = EntityClass::person;

  friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
};

struct Utterance {
  std::vector<std::string> tokens;
  std::optional<std::string> speaker;
  std::optional<std::int64_t> start_ms;
  std::optional<std::int64_t> end_ms;
  std::vector<EntitySpan> entities;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct Dialogue {
  std::string id;
  std::vector<Utterance> utterances;
  // Free-form; recognised keys are "genre" (string), "duration_ms" (number)
  // and "cast" (array of character names).
  nlohmann::json metadata = nlohmann::json::object();
};

struct DialoguePair {
  std::vector<Utterance> context;
  std::vector<Utterance> response;
  std::optional<std::int64_t> gap_ms;  // response start - context end
  std::vector<double> extra_features;  // document-level features
  std::string source_id;
  std::optional<int> label;
  std::optional<double> weight;
  // Distinct speakers in the source sub-dialogue; empty when any utterance
  // lacks a speaker. Not serialized.
  std::optional<std::size_t> source_speakers;
};

// --- dialogue JSONL ----------------------------------------------------------

// One dialogue per non-blank line. Throws ParseError for malformed JSON and
// SchemaError for missing fields or violated invariants; both carry the
// 1-based line number.
std::vector<Dialogue> read_dialogues(std::istream& in);
std::vector<Dialogue> parse_dialogue_file(const std::filesystem::path& path);
Dialogue dialogue_from_json(const nlohmann::json& j, std::size_t line);
nlohmann::json dialogue_to_json(const Dialogue& d);
void write_dialogues(std::ostream& out, const std::vector<Dialogue>& dialogues);

// --- pair JSONL ----------------------------------------------------------------

std::vector<DialoguePair> read_pairs(std::istream& in);
std::vector<DialoguePair> read_pair_file(const std::filesystem::path& path);
DialoguePair pair_from_json(const nlohmann::json& j, std::size_t line);
nlohmann::json pair_to_json(const DialoguePair& p);
void write_pairs(std::ostream& out, const std::vector<DialoguePair>& pairs);
void write_pair_file(const std::filesystem::path& path, const std::vector<DialoguePair>& pairs);

// --- segmentation and extraction ----------------------------------------------

inline constexpr std::int64_t kDefaultMaxGapMs = 10000;

struct Segmentation {
  std::vector<Dialogue> segments;
  bool timestamps_missing = false;  // input returned unsplit
};

// Splits wherever next.start_ms - prev.end_ms > max_gap_ms. Segment ids are
// "<id>#<k>"; metadata is copied to every segment.
Segmentation segment_subdialogues(const Dialogue& d, std::int64_t max_gap_ms = kDefaultMaxGapMs);

enum class PairMode {
  utterance,  // a pair at every utterance boundary, single-utterance response
  turn,       // a pair at every speaker change, response = the whole next turn
};

struct ExtractionConfig {
  PairMode mode = PairMode::utterance;
  std::size_t context_window = 0;    // max preceding utterances, 0 = all
  std::vector<std::string> genres;   // one-hot over metadata.genre when non-empty
  bool duration_feature = false;     // metadata.duration_ms / 600000, clamped to [0, 10]
};

std::vector<DialoguePair> extract_pairs(const Dialogue& d, const ExtractionConfig& config = {});

// --- heuristic selection -------------------------------------------------------

// Lower-cased cast names keyed by pair source_id.
using CastLists = std::unordered_map<std::string, std::vector<std::string>>;

// Lower-cased "cast" metadata entries.
std::vector<std::string> cast_names(const Dialogue& d);

// Why a pair fails the quality heuristics; nullopt when it passes.
std::optional<std::string> quality_violation(const DialoguePair& pair, const Vocabulary& vocab,
                                             const std::vector<std::string>& cast);

// Keeps pairs whose source sub-dialogue has exactly two speakers, whose last
// context speaker differs from the first response speaker, and which contain
// neither a cast name (case-insensitive, whole tokens) nor an
// out-of-vocabulary token outside entity spans. Pairs without speaker
// annotation are dropped.
std::vector<DialoguePair> select_high_quality(const std::vector<DialoguePair>& pairs,
                                              const Vocabulary& vocab, const CastLists& cast);

// --- negative sampling ---------------------------------------------------------

// For each positive emits the positive (label 1) followed by `ratio`
// negatives (label 0) that keep its context, source_id and weight and take a
// response drawn uniformly from `pool`, never one whose tokens equal the true
// response. gap_ms comes from the pool pair the response was drawn from.
std::vector<DialoguePair> sample_negatives(const std::vector<DialoguePair>& positives,
                                           const std::vector<DialoguePair>& pool,
                                           std::size_t ratio, Rng& rng);
inline std::vector<DialoguePair> sample_negatives(const std::vector<DialoguePair>& pairs,
                                                  std::size_t ratio, Rng& rng) {
  return sample_negatives(pairs, pairs, ratio, rng);
}

bool same_tokens(const std::vector<Utterance>& a, const std::vector<Utterance>& b);

}  // namespace dialweight
