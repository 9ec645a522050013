#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dialweight/corpus.hpp"

namespace dialweight {

inline constexpr std::size_t kDefaultVocabCap = 25000;
inline constexpr int kMaxEntityTags = 10;

inline constexpr const char* kPadToken = "<pad>";
inline constexpr const char* kUnknownToken = "<unknown>";
inline constexpr const char* kNewTurnToken = "<newturn>";
inline constexpr const char* kNumberToken = "<number>";

std::string person_tag(int index);    // "<person1>" ... "<person10>"
std::string location_tag(int index);  // "<location1>" ...
bool is_tag_token(std::string_view token);

// Token <-> id bijection. Special tokens come first, in a fixed order, and
// are present in every vocabulary: <pad>=0, <unknown>=1, <newturn>=2,
// <number>=3, <person1..10>, <location1..10>.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnknown = 1;
  static constexpr int kNewTurn = 2;
  static constexpr int kNumber = 3;

  // Only the special tokens.
  Vocabulary();

  static const std::vector<std::string>& special_tokens();

  // Parses the one-token-per-line file format. Throws DataError when the
  // special tokens are not the leading lines or a token repeats.
  static Vocabulary parse(std::string_view text);
  static Vocabulary load(const std::filesystem::path& path);

  std::string serialize() const;
  void save(const std::filesystem::path& path) const;
  // FNV-1a of serialize().
  std::uint64_t fingerprint() const;

  std::size_t size() const { return tokens_.size(); }
  bool contains(std::string_view token) const;
  // kUnknown for tokens outside the vocabulary.
  int id(std::string_view token) const;
  const std::string& token(int id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  void append(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

using TokenCounts = std::map<std::string, std::uint64_t>;

void count_tokens(const std::vector<std::string>& tokens, TokenCounts& counts);

// The `cap` most frequent tokens (ties broken lexicographically) after the
// special tokens. Tokens that are special, empty, or contain a line break
// are skipped.
Vocabulary build_vocabulary(const TokenCounts& counts, std::size_t cap = kDefaultVocabCap);
Vocabulary build_vocabulary(const std::vector<std::string>& token_stream,
                            std::size_t cap = kDefaultVocabCap);

// --- entity anonymization ----------------------------------------------------

// Per-dialogue assignment of entity mentions to tags. Mentions are keyed by
// class and lower-cased surface text.
class EntityRegistry {
 public:
  std::string tag_for(EntityClass cls, const std::string& surface);

 private:
  std::map<std::pair<EntityClass, std::string>, std::string> tags_;
  int persons_ = 0;
  int locations_ = 0;
};

// Each span collapses to a single tag token; spans are cleared in the result.
Utterance anonymize_entities(const Utterance& u, EntityRegistry& registry);
Dialogue anonymize_dialogue(const Dialogue& d);

// --- encoding ----------------------------------------------------------------

struct TruncationLimits {
  std::size_t context_utterances = 10;
  std::size_t context_tokens = 60;
  std::size_t response_utterances = 5;
  std::size_t response_tokens = 30;
};

// Token sequences after turn tagging and truncation, before id mapping.
struct TaggedPair {
  std::vector<std::string> context;
  std::vector<std::string> response;
};

// Context keeps the last `context_utterances` utterances, then the last
// `context_tokens` tokens; the response keeps the first utterances/tokens.
// <newturn> separates adjacent surviving utterances unless both carry the
// same speaker, and is not counted against the token limits.
TaggedPair tag_and_truncate(const DialoguePair& p, const TruncationLimits& limits);

inline constexpr double kGapScaleMs = 10000.0;
inline constexpr double kGapFeatureMax = 10.0;

struct EncodedPair {
  std::vector<int> context_ids;
  std::vector<int> response_ids;
  // [gap_ms / 10000 clamped to [0, 10], gap present ? 1 : 0, extra features...]
  std::vector<double> features;
  std::optional<int> label;
  std::optional<double> weight;
  std::string source_id;
};

std::vector<double> pair_features(const DialoguePair& p);
EncodedPair encode_pair(const DialoguePair& p, const Vocabulary& vocab,
                        const TruncationLimits& limits = {});
std::vector<EncodedPair> encode_pairs(const std::vector<DialoguePair>& pairs, const Vocabulary& vocab,
                                      const TruncationLimits& limits = {});
std::vector<std::string> decode_ids(const std::vector<int>& ids, const Vocabulary& vocab);

}  // namespace dialweight
