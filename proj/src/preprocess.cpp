#include "dialweight/preprocess.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "dialweight/error.hpp"
#include "dialweight/rng.hpp"
#include "dialweight/text.hpp"

namespace dialweight {

std::string person_tag(int index) { return "<person" + std::to_string(index) + ">"; }
std::string location_tag(int index) { return "<location" + std::to_string(index) + ">"; }

bool is_tag_token(std::string_view token) {
  return token.size() > 2 && token.front() == '<' && token.back() == '>';
}

const std::vector<std::string>& Vocabulary::special_tokens() {
  static const std::vector<std::string> specials = [] {
    std::vector<std::string> s = {kPadToken, kUnknownToken, kNewTurnToken, kNumberToken};
    for (int i = 1; i <= kMaxEntityTags; ++i) s.push_back(person_tag(i));
    for (int i = 1; i <= kMaxEntityTags; ++i) s.push_back(location_tag(i));
    return s;
  }();
  return specials;
}

Vocabulary::Vocabulary() {
  for (const auto& t : special_tokens()) append(t);
}

void Vocabulary::append(std::string token) {
  const int id = static_cast<int>(tokens_.size());
  if (!ids_.emplace(token, id).second) throw DataError("duplicate vocabulary token '" + token + "'");
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::parse(std::string_view text) {
  std::vector<std::string> lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  const auto& specials = special_tokens();
  if (lines.size() < specials.size() ||
      !std::equal(specials.begin(), specials.end(), lines.begin())) {
    throw DataError("vocabulary does not start with the special tokens");
  }
  Vocabulary v;
  for (std::size_t i = specials.size(); i < lines.size(); ++i) v.append(lines[i]);
  return v;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read vocabulary " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string Vocabulary::serialize() const {
  std::string out;
  for (const auto& t : tokens_) {
    out += t;
    out += '\n';
  }
  return out;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << serialize();
}

std::uint64_t Vocabulary::fingerprint() const { return fnv1a64(serialize()); }

bool Vocabulary::contains(std::string_view token) const {
  return ids_.find(std::string(token)) != ids_.end();
}

int Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnknown : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw IndexError("vocabulary id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

void count_tokens(const std::vector<std::string>& tokens, TokenCounts& counts) {
  for (const auto& t : tokens) ++counts[t];
}

Vocabulary build_vocabulary(const TokenCounts& counts, std::size_t cap) {
  if (cap < 1) throw ConfigError("vocabulary cap must be at least 1");
  const auto& specials = Vocabulary::special_tokens();
  std::vector<std::pair<std::string, std::uint64_t>> ranked;
  for (const auto& [token, n] : counts) {
    if (token.empty() || token.find_first_of("\r\n") != std::string::npos) continue;
    if (std::find(specials.begin(), specials.end(), token) != specials.end()) continue;
    ranked.emplace_back(token, n);
  }
  // counts is ordered by token, so a stable sort on frequency keeps the
  // lexicographic tie-break.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > cap) ranked.resize(cap);
  Vocabulary v;
  std::string text = v.serialize();
  for (const auto& [token, n] : ranked) {
    text += token;
    text += '\n';
  }
  return Vocabulary::parse(text);
}

Vocabulary build_vocabulary(const std::vector<std::string>& token_stream, std::size_t cap) {
  TokenCounts counts;
  count_tokens(token_stream, counts);
  return build_vocabulary(counts, cap);
}

std::string EntityRegistry::tag_for(EntityClass cls, const std::string& surface) {
  if (cls == EntityClass::number) return kNumberToken;
  auto key = std::make_pair(cls, to_lower(surface));
  if (auto it = tags_.find(key); it != tags_.end()) return it->second;
  int& counter = cls == EntityClass::person ? persons_ : locations_;
  counter = std::min(counter + 1, kMaxEntityTags);
  std::string tag = cls == EntityClass::person ? person_tag(counter) : location_tag(counter);
  tags_.emplace(std::move(key), tag);
  return tag;
}

Utterance anonymize_entities(const Utterance& u, EntityRegistry& registry) {
  Utterance out = u;
  out.entities.clear();
  if (u.entities.empty()) return out;
  out.tokens.clear();
  std::size_t i = 0;
  for (const auto& span : u.entities) {
    for (; i < span.start; ++i) out.tokens.push_back(u.tokens[i]);
    std::vector<std::string> surface(u.tokens.begin() + static_cast<std::ptrdiff_t>(span.start),
                                     u.tokens.begin() + static_cast<std::ptrdiff_t>(span.end));
    out.tokens.push_back(registry.tag_for(span.cls, join(surface, " ")));
    i = span.end;
  }
  for (; i < u.tokens.size(); ++i) out.tokens.push_back(u.tokens[i]);
  return out;
}

Dialogue anonymize_dialogue(const Dialogue& d) {
  EntityRegistry registry;
  Dialogue out;
  out.id = d.id;
  out.metadata = d.metadata;
  for (const auto& u : d.utterances) out.utterances.push_back(anonymize_entities(u, registry));
  return out;
}

namespace {

struct Piece {
  const Utterance* utterance;
  std::size_t begin;
  std::size_t end;
};

std::vector<std::string> join_turns(const std::vector<Piece>& pieces) {
  std::vector<std::string> out;
  const Utterance* prev = nullptr;
  for (const auto& piece : pieces) {
    if (piece.begin == piece.end) continue;
    if (prev) {
      const bool same_speaker = prev->speaker && piece.utterance->speaker &&
                                *prev->speaker == *piece.utterance->speaker;
      if (!same_speaker) out.push_back(kNewTurnToken);
    }
    const auto& toks = piece.utterance->tokens;
    out.insert(out.end(), toks.begin() + static_cast<std::ptrdiff_t>(piece.begin),
               toks.begin() + static_cast<std::ptrdiff_t>(piece.end));
    prev = piece.utterance;
  }
  return out;
}

}  // namespace

TaggedPair tag_and_truncate(const DialoguePair& p, const TruncationLimits& limits) {
  TaggedPair out;

  const std::size_t n_ctx = std::min(p.context.size(), limits.context_utterances);
  std::vector<Piece> ctx;
  std::size_t budget = limits.context_tokens;
  for (std::size_t k = 0; k < n_ctx && budget > 0; ++k) {
    const Utterance& u = p.context[p.context.size() - 1 - k];
    const std::size_t take = std::min(budget, u.tokens.size());
    ctx.push_back({&u, u.tokens.size() - take, u.tokens.size()});
    budget -= take;
  }
  std::reverse(ctx.begin(), ctx.end());
  out.context = join_turns(ctx);

  const std::size_t n_rsp = std::min(p.response.size(), limits.response_utterances);
  std::vector<Piece> rsp;
  budget = limits.response_tokens;
  for (std::size_t k = 0; k < n_rsp && budget > 0; ++k) {
    const Utterance& u = p.response[k];
    const std::size_t take = std::min(budget, u.tokens.size());
    rsp.push_back({&u, 0, take});
    budget -= take;
  }
  out.response = join_turns(rsp);
  return out;
}

std::vector<double> pair_features(const DialoguePair& p) {
  std::vector<double> f;
  if (p.gap_ms) {
    f.push_back(std::clamp(static_cast<double>(*p.gap_ms) / kGapScaleMs, 0.0, kGapFeatureMax));
    f.push_back(1.0);
  } else {
    f.push_back(0.0);
    f.push_back(0.0);
  }
  f.insert(f.end(), p.extra_features.begin(), p.extra_features.end());
  return f;
}

EncodedPair encode_pair(const DialoguePair& p, const Vocabulary& vocab, const TruncationLimits& limits) {
  const TaggedPair tagged = tag_and_truncate(p, limits);
  EncodedPair e;
  e.context_ids.reserve(tagged.context.size());
  for (const auto& t : tagged.context) e.context_ids.push_back(vocab.id(t));
  e.response_ids.reserve(tagged.response.size());
  for (const auto& t : tagged.response) e.response_ids.push_back(vocab.id(t));
  e.features = pair_features(p);
  e.label = p.label;
  e.weight = p.weight;
  e.source_id = p.source_id;
  return e;
}

std::vector<EncodedPair> encode_pairs(const std::vector<DialoguePair>& pairs, const Vocabulary& vocab,
                                      const TruncationLimits& limits) {
  std::vector<EncodedPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(encode_pair(p, vocab, limits));
  return out;
}

std::vector<std::string> decode_ids(const std::vector<int>& ids, const Vocabulary& vocab) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(vocab.token(id));
  return out;
}

}  // namespace dialweight
