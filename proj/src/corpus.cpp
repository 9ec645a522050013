#include "dialweight/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "dialweight/error.hpp"
#include "dialweight/preprocess.hpp"
#include "dialweight/text.hpp"

namespace dialweight {

using nlohmann::json;

std::string to_string(EntityClass c) {
  switch (c) {
    case EntityClass::person:
      return "PERSON";
    case EntityClass::location:
      return "LOCATION";
    case EntityClass::number:
      return "NUMBER";
  }
  return "PERSON";
}

EntityClass entity_class_from_string(const std::string& s) {
  if (s == "PERSON") return EntityClass::person;
  if (s == "LOCATION") return EntityClass::location;
  if (s == "NUMBER") return EntityClass::number;
  throw ConfigError("unknown entity class '" + s + "'");
}

namespace {

const json& require(const json& j, const char* key, std::size_t line, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(line, where + " is missing required field '" + key + "'");
  return *it;
}

std::vector<std::string> token_list(const json& j, std::size_t line, const std::string& where) {
  if (!j.is_array()) throw SchemaError(line, where + " must be an array of strings");
  std::vector<std::string> out;
  out.reserve(j.size());
  for (const auto& t : j) {
    if (!t.is_string()) throw SchemaError(line, where + " must contain only strings");
    out.push_back(t.get<std::string>());
  }
  return out;
}

std::optional<std::int64_t> optional_int(const json& j, const char* key, std::size_t line,
                                         const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer()) throw SchemaError(line, where + "." + key + " must be an integer");
  return it->get<std::int64_t>();
}

std::optional<std::string> optional_string(const json& j, const char* key, std::size_t line,
                                           const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw SchemaError(line, where + "." + key + " must be a string");
  return it->get<std::string>();
}

Utterance utterance_from_json(const json& j, std::size_t line, const std::string& where) {
  if (!j.is_object()) throw SchemaError(line, where + " must be an object");
  Utterance u;
  u.tokens = token_list(require(j, "tokens", line, where), line, where + ".tokens");
  u.speaker = optional_string(j, "speaker", line, where);
  u.start_ms = optional_int(j, "start_ms", line, where);
  u.end_ms = optional_int(j, "end_ms", line, where);
  if (u.start_ms && u.end_ms && *u.end_ms < *u.start_ms) {
    throw SchemaError(line, where + " has end_ms < start_ms");
  }
  if (auto it = j.find("entities"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw SchemaError(line, where + ".entities must be an array");
    for (const auto& e : *it) {
      if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() ||
          !e[1].is_number_integer() || !e[2].is_string()) {
        throw SchemaError(line, where + ".entities entries must be [start, end, class]");
      }
      const auto start = e[0].get<std::int64_t>();
      const auto end = e[1].get<std::int64_t>();
      if (start < 0 || end <= start || static_cast<std::size_t>(end) > u.tokens.size()) {
        throw SchemaError(line, where + " has an entity span outside the token range");
      }
      EntityClass cls;
      try {
        cls = entity_class_from_string(e[2].get<std::string>());
      } catch (const ConfigError& err) {
        throw SchemaError(line, where + ": " + err.what());
      }
      u.entities.push_back({static_cast<std::size_t>(start), static_cast<std::size_t>(end), cls});
    }
    std::sort(u.entities.begin(), u.entities.end(),
              [](const EntitySpan& a, const EntitySpan& b) { return a.start < b.start; });
    for (std::size_t i = 1; i < u.entities.size(); ++i) {
      if (u.entities[i].start < u.entities[i - 1].end) {
        throw SchemaError(line, where + " has overlapping entity spans");
      }
    }
  }
  return u;
}

json utterance_to_json(const Utterance& u) {
  json j = json::object();
  j["tokens"] = u.tokens;
  if (u.speaker) j["speaker"] = *u.speaker;
  if (u.start_ms) j["start_ms"] = *u.start_ms;
  if (u.end_ms) j["end_ms"] = *u.end_ms;
  if (!u.entities.empty()) {
    json ents = json::array();
    for (const auto& e : u.entities) ents.push_back({e.start, e.end, to_string(e.cls)});
    j["entities"] = std::move(ents);
  }
  return j;
}

template <typename Fn>
void for_each_jsonl(std::istream& in, Fn&& fn) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(line, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError(line, "record must be a JSON object");
    fn(j, line);
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

json utterance_tokens(const std::vector<Utterance>& utts) {
  json out = json::array();
  for (const auto& u : utts) out.push_back(u.tokens);
  return out;
}

json utterance_speakers(const std::vector<Utterance>& utts) {
  json out = json::array();
  for (const auto& u : utts) out.push_back(u.speaker ? json(*u.speaker) : json(nullptr));
  return out;
}

std::vector<Utterance> utterances_from_pair_json(const json& j, const char* key,
                                                 const char* speaker_key, std::size_t line) {
  const json& arr = require(j, key, line, "pair");
  if (!arr.is_array()) throw SchemaError(line, std::string("pair.") + key + " must be an array");
  std::vector<Utterance> out;
  for (const auto& toks : arr) {
    Utterance u;
    u.tokens = token_list(toks, line, std::string("pair.") + key + "[]");
    out.push_back(std::move(u));
  }
  if (auto it = j.find(speaker_key); it != j.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != out.size()) {
      throw SchemaError(line, std::string("pair.") + speaker_key + " must match " + key);
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
      const json& s = (*it)[i];
      if (s.is_string()) {
        out[i].speaker = s.get<std::string>();
      } else if (!s.is_null()) {
        throw SchemaError(line, std::string("pair.") + speaker_key + " entries must be strings");
      }
    }
  }
  return out;
}

bool has_all_speakers(const std::vector<Utterance>& utts) {
  return std::all_of(utts.begin(), utts.end(), [](const Utterance& u) { return u.speaker.has_value(); });
}

bool any_speaker(const std::vector<Utterance>& utts) {
  return std::any_of(utts.begin(), utts.end(), [](const Utterance& u) { return u.speaker.has_value(); });
}

}  // namespace

Dialogue dialogue_from_json(const json& j, std::size_t line) {
  Dialogue d;
  const json& id = require(j, "id", line, "dialogue");
  if (!id.is_string()) throw SchemaError(line, "dialogue.id must be a string");
  d.id = id.get<std::string>();
  if (auto it = j.find("metadata"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw SchemaError(line, "dialogue.metadata must be an object");
    d.metadata = *it;
  }
  const json& utts = require(j, "utterances", line, "dialogue");
  if (!utts.is_array()) throw SchemaError(line, "dialogue.utterances must be an array");
  std::optional<std::int64_t> last_start;
  for (std::size_t i = 0; i < utts.size(); ++i) {
    Utterance u = utterance_from_json(utts[i], line, "utterances[" + std::to_string(i) + "]");
    if (u.start_ms) {
      if (last_start && *u.start_ms < *last_start) {
        throw SchemaError(line, "utterances[" + std::to_string(i) + "] starts before its predecessor");
      }
      last_start = u.start_ms;
    }
    d.utterances.push_back(std::move(u));
  }
  return d;
}

json dialogue_to_json(const Dialogue& d) {
  json j = json::object();
  j["id"] = d.id;
  j["metadata"] = d.metadata;
  json utts = json::array();
  for (const auto& u : d.utterances) utts.push_back(utterance_to_json(u));
  j["utterances"] = std::move(utts);
  return j;
}

std::vector<Dialogue> read_dialogues(std::istream& in) {
  std::vector<Dialogue> out;
  for_each_jsonl(in, [&](const json& j, std::size_t line) { out.push_back(dialogue_from_json(j, line)); });
  return out;
}

std::vector<Dialogue> parse_dialogue_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_dialogues(in);
}

void write_dialogues(std::ostream& out, const std::vector<Dialogue>& dialogues) {
  for (const auto& d : dialogues) out << dialogue_to_json(d).dump() << '\n';
}

DialoguePair pair_from_json(const json& j, std::size_t line) {
  DialoguePair p;
  p.context = utterances_from_pair_json(j, "context", "context_speakers", line);
  p.response = utterances_from_pair_json(j, "response", "response_speakers", line);
  if (p.context.empty() || p.response.empty()) {
    throw SchemaError(line, "pair context and response must be non-empty");
  }
  const json& src = require(j, "source_id", line, "pair");
  if (!src.is_string()) throw SchemaError(line, "pair.source_id must be a string");
  p.source_id = src.get<std::string>();
  p.gap_ms = optional_int(j, "gap_ms", line, "pair");
  if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer() || (it->get<int>() != 0 && it->get<int>() != 1)) {
      throw SchemaError(line, "pair.label must be 0 or 1");
    }
    p.label = it->get<int>();
  }
  if (auto it = j.find("weight"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) throw SchemaError(line, "pair.weight must be a number");
    const double w = it->get<double>();
    if (!(w > 0.0 && w <= 1.0)) throw SchemaError(line, "pair.weight must lie in (0, 1]");
    p.weight = w;
  }
  if (auto it = j.find("features"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw SchemaError(line, "pair.features must be an array");
    for (const auto& f : *it) {
      if (!f.is_number()) throw SchemaError(line, "pair.features must contain numbers");
      p.extra_features.push_back(f.get<double>());
    }
  }
  return p;
}

json pair_to_json(const DialoguePair& p) {
  json j = json::object();
  j["context"] = utterance_tokens(p.context);
  j["response"] = utterance_tokens(p.response);
  if (any_speaker(p.context)) j["context_speakers"] = utterance_speakers(p.context);
  if (any_speaker(p.response)) j["response_speakers"] = utterance_speakers(p.response);
  if (p.gap_ms) j["gap_ms"] = *p.gap_ms;
  if (p.label) j["label"] = *p.label;
  if (p.weight) j["weight"] = *p.weight;
  if (!p.extra_features.empty()) j["features"] = p.extra_features;
  j["source_id"] = p.source_id;
  return j;
}

std::vector<DialoguePair> read_pairs(std::istream& in) {
  std::vector<DialoguePair> out;
  for_each_jsonl(in, [&](const json& j, std::size_t line) { out.push_back(pair_from_json(j, line)); });
  return out;
}

std::vector<DialoguePair> read_pair_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_pairs(in);
}

void write_pairs(std::ostream& out, const std::vector<DialoguePair>& pairs) {
  for (const auto& p : pairs) out << pair_to_json(p).dump() << '\n';
}

void write_pair_file(const std::filesystem::path& path, const std::vector<DialoguePair>& pairs) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  write_pairs(out, pairs);
}

Segmentation segment_subdialogues(const Dialogue& d, std::int64_t max_gap_ms) {
  Segmentation result;
  const bool timed = std::all_of(d.utterances.begin(), d.utterances.end(), [](const Utterance& u) {
    return u.start_ms.has_value() && u.end_ms.has_value();
  });
  auto new_segment = [&] {
    Dialogue seg;
    seg.id = d.id + "#" + std::to_string(result.segments.size());
    seg.metadata = d.metadata;
    result.segments.push_back(std::move(seg));
  };
  if (!timed) {
    result.timestamps_missing = true;
    new_segment();
    result.segments.back().utterances = d.utterances;
    return result;
  }
  for (std::size_t i = 0; i < d.utterances.size(); ++i) {
    if (i == 0 || *d.utterances[i].start_ms - *d.utterances[i - 1].end_ms > max_gap_ms) {
      new_segment();
    }
    result.segments.back().utterances.push_back(d.utterances[i]);
  }
  return result;
}

std::vector<DialoguePair> extract_pairs(const Dialogue& d, const ExtractionConfig& config) {
  std::vector<DialoguePair> pairs;
  const auto& utts = d.utterances;
  if (utts.size() < 2) return pairs;

  std::optional<std::size_t> speakers;
  if (has_all_speakers(utts)) {
    std::set<std::string> distinct;
    for (const auto& u : utts) distinct.insert(*u.speaker);
    speakers = distinct.size();
  }

  std::vector<double> features;
  if (!config.genres.empty()) {
    const std::string genre = d.metadata.value("genre", std::string());
    for (const auto& g : config.genres) features.push_back(g == genre ? 1.0 : 0.0);
  }
  if (config.duration_feature) {
    double duration = 0.0;
    if (auto it = d.metadata.find("duration_ms"); it != d.metadata.end() && it->is_number()) {
      duration = it->get<double>() / 600000.0;
    }
    features.push_back(std::clamp(duration, 0.0, 10.0));
  }

  // Response start positions and their (exclusive) ends.
  std::vector<std::pair<std::size_t, std::size_t>> responses;
  if (config.mode == PairMode::utterance) {
    for (std::size_t k = 1; k < utts.size(); ++k) responses.emplace_back(k, k + 1);
  } else {
    auto same_turn = [&](std::size_t a, std::size_t b) {
      return utts[a].speaker && utts[b].speaker && *utts[a].speaker == *utts[b].speaker;
    };
    std::vector<std::size_t> starts;
    for (std::size_t k = 1; k < utts.size(); ++k) {
      if (!same_turn(k - 1, k)) starts.push_back(k);
    }
    for (std::size_t i = 0; i < starts.size(); ++i) {
      responses.emplace_back(starts[i], i + 1 < starts.size() ? starts[i + 1] : utts.size());
    }
  }

  for (auto [begin, end] : responses) {
    DialoguePair p;
    const std::size_t first =
        config.context_window == 0 || begin <= config.context_window ? 0 : begin - config.context_window;
    p.context.assign(utts.begin() + static_cast<std::ptrdiff_t>(first),
                     utts.begin() + static_cast<std::ptrdiff_t>(begin));
    p.response.assign(utts.begin() + static_cast<std::ptrdiff_t>(begin),
                      utts.begin() + static_cast<std::ptrdiff_t>(end));
    if (p.response.front().start_ms && p.context.back().end_ms) {
      p.gap_ms = *p.response.front().start_ms - *p.context.back().end_ms;
    }
    p.extra_features = features;
    p.source_id = d.id;
    p.source_speakers = speakers;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<std::string> cast_names(const Dialogue& d) {
  std::vector<std::string> out;
  if (auto it = d.metadata.find("cast"); it != d.metadata.end() && it->is_array()) {
    for (const auto& name : *it) {
      if (name.is_string()) out.push_back(to_lower(name.get<std::string>()));
    }
  }
  return out;
}

std::optional<std::string> quality_violation(const DialoguePair& pair, const Vocabulary& vocab,
                                             const std::vector<std::string>& cast) {
  if (!pair.source_speakers || !has_all_speakers(pair.context) || !has_all_speakers(pair.response)) {
    return "missing speaker annotation";
  }
  if (*pair.source_speakers != 2) {
    return "sub-dialogue has " + std::to_string(*pair.source_speakers) + " speakers";
  }
  if (*pair.context.back().speaker == *pair.response.front().speaker) return "no speaker change";

  std::vector<std::vector<std::string>> cast_tokens;
  for (const auto& name : cast) {
    auto toks = split_whitespace(name);
    if (!toks.empty()) cast_tokens.push_back(std::move(toks));
  }
  auto check = [&](const Utterance& u) -> std::optional<std::string> {
    std::vector<std::string> lower;
    lower.reserve(u.tokens.size());
    for (const auto& t : u.tokens) lower.push_back(to_lower(t));
    for (const auto& name : cast_tokens) {
      if (name.size() > lower.size()) continue;
      for (std::size_t i = 0; i + name.size() <= lower.size(); ++i) {
        if (std::equal(name.begin(), name.end(), lower.begin() + static_cast<std::ptrdiff_t>(i))) {
          return "character name '" + u.tokens[i] + "'";
        }
      }
    }
    std::vector<bool> in_span(u.tokens.size(), false);
    for (const auto& e : u.entities) {
      for (std::size_t i = e.start; i < e.end && i < in_span.size(); ++i) in_span[i] = true;
    }
    for (std::size_t i = 0; i < u.tokens.size(); ++i) {
      if (!in_span[i] && !vocab.contains(u.tokens[i])) {
        return "out-of-vocabulary token '" + u.tokens[i] + "'";
      }
    }
    return std::nullopt;
  };
  for (const auto* side : {&pair.context, &pair.response}) {
    for (const auto& u : *side) {
      if (auto why = check(u)) return why;
    }
  }
  return std::nullopt;
}

std::vector<DialoguePair> select_high_quality(const std::vector<DialoguePair>& pairs,
                                              const Vocabulary& vocab, const CastLists& cast) {
  static const std::vector<std::string> kNoCast;
  std::vector<DialoguePair> out;
  for (const auto& p : pairs) {
    auto it = cast.find(p.source_id);
    if (!quality_violation(p, vocab, it == cast.end() ? kNoCast : it->second)) out.push_back(p);
  }
  return out;
}

bool same_tokens(const std::vector<Utterance>& a, const std::vector<Utterance>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].tokens != b[i].tokens) return false;
  }
  return true;
}

std::vector<DialoguePair> sample_negatives(const std::vector<DialoguePair>& positives,
                                           const std::vector<DialoguePair>& pool,
                                           std::size_t ratio, Rng& rng) {
  if (ratio < 1) throw ConfigError("negative sampling ratio must be at least 1");
  if (pool.size() < 2) {
    throw DataError("negative sampling needs a response pool of at least 2 pairs, got " +
                    std::to_string(pool.size()));
  }
  constexpr int kMaxDraws = 64;
  std::vector<DialoguePair> out;
  out.reserve(positives.size() * (ratio + 1));
  for (const auto& pos : positives) {
    DialoguePair positive = pos;
    positive.label = 1;
    out.push_back(positive);
    for (std::size_t r = 0; r < ratio; ++r) {
      std::optional<std::size_t> pick;
      for (int attempt = 0; attempt < kMaxDraws && !pick; ++attempt) {
        const auto j = static_cast<std::size_t>(rng.below(pool.size()));
        if (!same_tokens(pool[j].response, pos.response)) pick = j;
      }
      if (!pick) {
        // Nearly every pool response equals this one; fall back to a scan.
        const auto offset = static_cast<std::size_t>(rng.below(pool.size()));
        for (std::size_t k = 0; k < pool.size() && !pick; ++k) {
          const std::size_t j = (offset + k) % pool.size();
          if (!same_tokens(pool[j].response, pos.response)) pick = j;
        }
      }
      if (!pick) {
        throw DataError("no response in the pool differs from the true response of a pair from '" +
                        pos.source_id + "'");
      }
      DialoguePair neg = positive;
      neg.response = pool[*pick].response;
      neg.gap_ms = pool[*pick].gap_ms;
      neg.label = 0;
      out.push_back(std::move(neg));
    }
  }
  return out;
}

}  // namespace dialweight
