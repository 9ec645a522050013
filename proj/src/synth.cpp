#include "dialweight/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "dialweight/error.hpp"
#include "dialweight/rng.hpp"
#include "dialweight/text.hpp"

namespace dialweight {

std::string to_string(SynthKind k) {
  switch (k) {
    case SynthKind::planted:
      return "planted";
    case SynthKind::genuine:
      return "genuine";
    case SynthKind::continuation:
      return "continuation";
    case SynthKind::entity:
      return "entity";
    case SynthKind::dull:
      return "dull";
  }
  return "unknown";
}

std::size_t SynthPlan::total() const {
  std::size_t n = 0;
  for (const auto& [kind, count] : counts) n += count;
  return n;
}

SynthPlan plan_corpus(const SynthConfig& config) {
  const double hq = config.high_quality_fraction;
  const double noise = config.noise_fraction;
  if (!(hq >= 0.0 && hq <= 1.0) || !(noise >= 0.0 && noise <= 1.0) || hq + noise > 1.0) {
    throw ConfigError("synthetic fractions must lie in [0, 1] and sum to at most 1");
  }
  if (noise > 0.0 && config.noise_types.empty()) throw ConfigError("noise_fraction > 0 needs noise types");
  for (SynthKind k : config.noise_types) {
    if (k == SynthKind::planted || k == SynthKind::genuine) {
      throw ConfigError("'" + to_string(k) + "' is not a noise type");
    }
  }

  const auto n = static_cast<double>(config.dialogues);
  const auto planted = static_cast<std::size_t>(std::llround(hq * n));
  const auto noisy = static_cast<std::size_t>(std::llround(noise * n));
  if (planted + noisy > config.dialogues) throw ConfigError("planted and noise counts exceed the corpus");

  SynthPlan plan;
  plan.counts[SynthKind::planted] = planted;
  for (SynthKind k : config.noise_types) plan.counts[k] = 0;
  for (std::size_t i = 0; i < noisy; ++i) ++plan.counts[config.noise_types[i % config.noise_types.size()]];
  plan.counts[SynthKind::genuine] = config.dialogues - planted - noisy;
  return plan;
}

namespace {

const std::vector<std::string> kCastPool = {"Frank", "Alice", "Oscar",  "Edith", "Grace", "Hector",
                                            "Ingrid", "Owen", "Ursula", "Victor", "Wendy", "Yvonne"};

const std::vector<std::vector<std::string>> kOpeners = {
    {"do", "you", "know"}, {"what", "about"}, {"did", "you", "see"}, {"tell", "me", "about"}, {"is", "it"}};
const std::vector<std::string> kReplyMarkers = {"yes", "no", "well", "sure", "maybe"};
const std::vector<std::string> kContinuationMarkers = {"and", "also", "then", "plus"};
const std::vector<std::vector<std::string>> kDullReplies = {
    {"i", "don't", "know", "."}, {"i", "see", "."}, {"okay", "."}, {"what", "?"}, {"no", "idea", "."}};

// Pronounceable lower-case pseudo-words, unique across the lexicon.
std::vector<std::string> make_lexicon(std::size_t n, Rng& rng) {
  static const std::string consonants = "bdfgklmnprstvz";
  static const std::string vowels = "aeiou";
  std::set<std::string> reserved;
  for (const auto& name : kCastPool) reserved.insert(to_lower(name));
  for (const auto& group : {kReplyMarkers, kContinuationMarkers}) reserved.insert(group.begin(), group.end());
  std::vector<std::string> words;
  std::set<std::string> seen;
  while (words.size() < n) {
    std::string w;
    const std::size_t syllables = 2 + rng.below(2);
    for (std::size_t s = 0; s < syllables; ++s) {
      w += consonants[rng.below(consonants.size())];
      w += vowels[rng.below(vowels.size())];
    }
    if (reserved.count(w) || !seen.insert(w).second) continue;
    words.push_back(w);
  }
  return words;
}

struct Lexicon {
  std::vector<std::vector<std::string>> question;  // per topic
  std::vector<std::vector<std::string>> answer;    // per topic
};

Lexicon make_topics(const SynthConfig& config, Rng& rng) {
  if (config.topics < 2 || config.words_per_topic < 1) throw ConfigError("synthetic corpus needs >= 2 topics");
  const std::size_t per = config.words_per_topic;
  const std::vector<std::string> words = make_lexicon(2 * config.topics * per, rng);
  Lexicon lex;
  for (std::size_t t = 0; t < config.topics; ++t) {
    lex.question.emplace_back(words.begin() + static_cast<std::ptrdiff_t>(2 * t * per),
                              words.begin() + static_cast<std::ptrdiff_t>((2 * t + 1) * per));
    lex.answer.emplace_back(words.begin() + static_cast<std::ptrdiff_t>((2 * t + 1) * per),
                            words.begin() + static_cast<std::ptrdiff_t>((2 * t + 2) * per));
  }
  return lex;
}

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[static_cast<std::size_t>(rng.below(v.size()))];
}

class DialogueMaker {
 public:
  DialogueMaker(const SynthConfig& config, const Lexicon& lex, Rng& rng) : config_(config), lex_(lex), rng_(rng) {}

  Dialogue make(const std::string& id, SynthKind kind) {
    Dialogue d;
    d.id = id;
    const std::size_t topic = rng_.below(config_.topics);

    std::vector<std::string> cast = {pick(kCastPool, rng_)};
    while (cast.size() < 2) {
      const std::string& c = pick(kCastPool, rng_);
      if (c != cast[0]) cast.push_back(c);
    }
    d.metadata = {{"genre", rng_.bernoulli(0.5) ? "drama" : "comedy"}, {"cast", cast}};

    Utterance context;
    context.tokens = question(topic);
    Utterance response;
    std::int64_t gap = 1500 + static_cast<std::int64_t>(rng_.below(6501));
    switch (kind) {
      case SynthKind::planted:
      case SynthKind::genuine:
        response.tokens = reply(topic, context.tokens);
        break;
      case SynthKind::continuation:
        response.tokens = reply(other_topic(topic), {});
        gap = static_cast<std::int64_t>(rng_.below(251));
        break;
      case SynthKind::entity: {
        const std::string& name = pick(cast, rng_);
        const std::size_t shifted = other_topic(topic);
        response.tokens = {pick(kReplyMarkers, rng_), name, ","};
        response.entities.push_back({1, 2, EntityClass::person});
        for (std::size_t k = 0, n = 2 + rng_.below(3); k < n; ++k) {
          response.tokens.push_back(pick(lex_.answer[shifted], rng_));
        }
        response.tokens.push_back(".");
        break;
      }
      case SynthKind::dull:
        response.tokens = pick(kDullReplies, rng_);
        break;
    }

    // Speaker annotation: planted and entity dialogues have two speakers,
    // half of the continuations are annotated with one, the rest none.
    if (kind == SynthKind::planted || kind == SynthKind::entity) {
      context.speaker = to_upper_ascii(cast[0]);
      response.speaker = to_upper_ascii(cast[1]);
    } else if (kind == SynthKind::continuation && rng_.bernoulli(0.5)) {
      context.speaker = to_upper_ascii(cast[0]);
      response.speaker = context.speaker;
    }

    context.start_ms = 0;
    context.end_ms = 250 * static_cast<std::int64_t>(context.tokens.size());
    response.start_ms = *context.end_ms + gap;
    response.end_ms = *response.start_ms + 250 * static_cast<std::int64_t>(response.tokens.size());
    d.metadata["duration_ms"] = *response.end_ms;
    d.utterances = {std::move(context), std::move(response)};
    return d;
  }

 private:
  static std::string to_upper_ascii(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
  }

  std::size_t other_topic(std::size_t topic) {
    return (topic + 1 + rng_.below(config_.topics - 1)) % config_.topics;
  }

  std::vector<std::string> question(std::size_t topic) {
    std::vector<std::string> t = pick(kOpeners, rng_);
    for (std::size_t k = 0, n = 2 + rng_.below(3); k < n; ++k) t.push_back(pick(lex_.question[topic], rng_));
    t.push_back("?");
    return t;
  }

  std::vector<std::string> reply(std::size_t topic, const std::vector<std::string>& asked) {
    std::vector<std::string> t = {pick(kReplyMarkers, rng_), ","};
    for (std::size_t k = 0, n = 2 + rng_.below(3); k < n; ++k) t.push_back(pick(lex_.answer[topic], rng_));
    if (rng_.bernoulli(config_.echo_probability)) {
      std::vector<std::string> topical;
      for (const auto& w : asked) {
        if (std::find(lex_.question[topic].begin(), lex_.question[topic].end(), w) != lex_.question[topic].end()) {
          topical.push_back(w);
        }
      }
      if (!topical.empty()) t.push_back(pick(topical, rng_));
    }
    t.push_back(".");
    return t;
  }

  const SynthConfig& config_;
  const Lexicon& lex_;
  Rng& rng_;
};

std::string numbered(const char* prefix, std::size_t i) {
  std::string digits = std::to_string(i);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return prefix + digits;
}

}  // namespace

SynthCorpus generate_corpus(const SynthConfig& config, std::uint64_t seed) {
  SynthCorpus out;
  out.plan = plan_corpus(config);

  Rng lexicon_rng(derive_seed(seed, "lexicon"));
  const Lexicon lex = make_topics(config, lexicon_rng);

  for (const auto& [kind, count] : out.plan.counts) out.kinds.insert(out.kinds.end(), count, kind);
  Rng order_rng(derive_seed(seed, "order"));
  order_rng.shuffle(out.kinds);

  Rng corpus_rng(derive_seed(seed, "corpus"));
  DialogueMaker corpus_maker(config, lex, corpus_rng);
  for (std::size_t i = 0; i < out.kinds.size(); ++i) {
    out.corpus.push_back(corpus_maker.make(numbered("d", i), out.kinds[i]));
  }

  Rng validation_rng(derive_seed(seed, "validation"));
  DialogueMaker validation_maker(config, lex, validation_rng);
  for (std::size_t i = 0; i < config.validation_dialogues; ++i) {
    out.validation.push_back(validation_maker.make(numbered("v", i), SynthKind::planted));
  }

  Rng test_rng(derive_seed(seed, "test"));
  DialogueMaker test_maker(config, lex, test_rng);
  for (std::size_t i = 0; i < config.test_dialogues; ++i) {
    out.test.push_back(test_maker.make(numbered("t", i), SynthKind::planted));
  }
  return out;
}

nlohmann::json ground_truth_json(const SynthCorpus& c) {
  nlohmann::json plan = nlohmann::json::object();
  for (const auto& [kind, count] : c.plan.counts) plan[to_string(kind)] = count;
  plan["dialogues"] = c.plan.total();
  nlohmann::json kinds = nlohmann::json::object();
  for (std::size_t i = 0; i < c.corpus.size(); ++i) kinds[c.corpus[i].id] = to_string(c.kinds[i]);
  return {{"plan", plan}, {"kinds", kinds}};
}

}  // namespace dialweight
