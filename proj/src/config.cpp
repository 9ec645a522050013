#include "dialweight/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dialweight/error.hpp"
#include "dialweight/eval.hpp"
#include "dialweight/text.hpp"

namespace dialweight {

PipelineConfig default_config() {
  PipelineConfig c;
  c.dual_encoder.trainer.epochs = 5;
  return c;
}

namespace {

using Setter = std::function<void(PipelineConfig&, const std::string&)>;

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  throw ConfigError(key + " = '" + value + "': expected " + expected);
}

double parse_double(const std::string& key, const std::string& v, double lo, double hi, bool open_hi = false) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  const bool in_range = x >= lo && (open_hi ? x < hi : x <= hi);
  if (used == 0 || used != v.size() || !in_range) {
    bad_value(key, v, "a number in [" + std::to_string(lo) + ", " + std::to_string(hi) + (open_hi ? ")" : "]"));
  }
  return x;
}

std::size_t parse_size(const std::string& key, const std::string& v, std::size_t lo, std::size_t hi) {
  std::size_t used = 0;
  unsigned long long x = 0;
  try {
    x = std::stoull(v, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || v.front() == '-' || x < lo || x > hi) {
    bad_value(key, v, "an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<std::size_t>(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
  const std::string s = to_lower(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad_value(key, v, "a boolean");
}

std::vector<std::string> parse_list(const std::string& v) {
  std::vector<std::string> out;
  for (auto& item : split(v, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

constexpr std::size_t kBig = 1'000'000'000;

void add_optimizer_keys(std::map<std::string, Setter>& s, const std::string& section,
                        std::function<TrainerConfig&(PipelineConfig&)> trainer) {
  s[section + ".epochs"] = [=](PipelineConfig& c, const std::string& v) {
    trainer(c).epochs = parse_size("epochs", v, 0, 100000);
  };
  s[section + ".batch_size"] = [=](PipelineConfig& c, const std::string& v) {
    trainer(c).batch_size = parse_size("batch_size", v, 1, kBig);
  };
  s[section + ".learning_rate"] = [=](PipelineConfig& c, const std::string& v) {
    trainer(c).optimizer.learning_rate = parse_double("learning_rate", v, 0.0, 10.0);
  };
  s[section + ".decay"] = [=](PipelineConfig& c, const std::string& v) {
    trainer(c).optimizer.decay = parse_double("decay", v, 0.0, 1.0, true);
  };
  s[section + ".epsilon"] = [=](PipelineConfig& c, const std::string& v) {
    trainer(c).optimizer.epsilon = parse_double("epsilon", v, 0.0, 1.0);
  };
  s[section + ".patience"] = [=](PipelineConfig& c, const std::string& v) {
    trainer(c).patience = parse_size("patience", v, 0, 100000);
  };
}

void add_encoder_keys(std::map<std::string, Setter>& s, const std::string& section,
                      std::function<EncoderShape&(PipelineConfig&)> shape, std::function<double&(PipelineConfig&)> dropout) {
  s[section + ".embedding_dim"] = [=](PipelineConfig& c, const std::string& v) {
    shape(c).embedding_dim = parse_size("embedding_dim", v, 1, 4096);
  };
  s[section + ".hidden_dim"] = [=](PipelineConfig& c, const std::string& v) {
    shape(c).hidden_dim = parse_size("hidden_dim", v, 1, 4096);
  };
  s[section + ".bidirectional"] = [=](PipelineConfig& c, const std::string& v) {
    shape(c).bidirectional = parse_bool("bidirectional", v);
  };
  s[section + ".dropout"] = [=](PipelineConfig& c, const std::string& v) {
    dropout(c) = parse_double("dropout", v, 0.0, 1.0, true);
  };
}

SynthKind parse_noise_type(const std::string& v) {
  if (v == "continuation") return SynthKind::continuation;
  if (v == "entity") return SynthKind::entity;
  if (v == "dull") return SynthKind::dull;
  bad_value("noise_types", v, "continuation, entity or dull");
}

const std::map<std::string, Setter>& schema() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> s;

    s["corpus.max_gap_ms"] = [](PipelineConfig& c, const std::string& v) {
      c.max_gap_ms = static_cast<std::int64_t>(parse_size("max_gap_ms", v, 0, kBig));
    };
    s["corpus.mode"] = [](PipelineConfig& c, const std::string& v) {
      if (v == "utterance") {
        c.extraction.mode = PairMode::utterance;
      } else if (v == "turn") {
        c.extraction.mode = PairMode::turn;
      } else {
        bad_value("mode", v, "utterance or turn");
      }
    };
    s["corpus.context_window"] = [](PipelineConfig& c, const std::string& v) {
      c.extraction.context_window = parse_size("context_window", v, 0, kBig);
    };
    s["corpus.genres"] = [](PipelineConfig& c, const std::string& v) { c.extraction.genres = parse_list(v); };
    s["corpus.duration_feature"] = [](PipelineConfig& c, const std::string& v) {
      c.extraction.duration_feature = parse_bool("duration_feature", v);
    };

    s["preprocess.vocab_cap"] = [](PipelineConfig& c, const std::string& v) {
      c.vocab_cap = parse_size("vocab_cap", v, 1, kBig);
    };
    s["preprocess.context_utterances"] = [](PipelineConfig& c, const std::string& v) {
      c.limits.context_utterances = parse_size("context_utterances", v, 1, 10000);
    };
    s["preprocess.context_tokens"] = [](PipelineConfig& c, const std::string& v) {
      c.limits.context_tokens = parse_size("context_tokens", v, 1, 100000);
    };
    s["preprocess.response_utterances"] = [](PipelineConfig& c, const std::string& v) {
      c.limits.response_utterances = parse_size("response_utterances", v, 1, 10000);
    };
    s["preprocess.response_tokens"] = [](PipelineConfig& c, const std::string& v) {
      c.limits.response_tokens = parse_size("response_tokens", v, 1, 100000);
    };

    add_encoder_keys(s, "weighter", [](PipelineConfig& c) -> EncoderShape& { return c.weighter.model.encoder; },
                     [](PipelineConfig& c) -> double& { return c.weighter.model.dropout; });
    add_optimizer_keys(s, "weighter", [](PipelineConfig& c) -> TrainerConfig& { return c.weighter.trainer; });
    s["weighter.merge_dim"] = [](PipelineConfig& c, const std::string& v) {
      c.weighter.model.merge_dim = parse_size("merge_dim", v, 1, 4096);
    };
    s["weighter.validation_fraction"] = [](PipelineConfig& c, const std::string& v) {
      c.weighter.validation_fraction = parse_double("validation_fraction", v, 0.0, 1.0, true);
    };
    s["weighter.negative_ratio"] = [](PipelineConfig& c, const std::string& v) {
      c.weighter.negative_ratio = parse_size("negative_ratio", v, 1, 100);
    };

    add_encoder_keys(s, "dual_encoder",
                     [](PipelineConfig& c) -> EncoderShape& { return c.dual_encoder.model.encoder; },
                     [](PipelineConfig& c) -> double& { return c.dual_encoder.model.dropout; });
    add_optimizer_keys(s, "dual_encoder",
                       [](PipelineConfig& c) -> TrainerConfig& { return c.dual_encoder.trainer; });
    s["dual_encoder.projection_dim"] = [](PipelineConfig& c, const std::string& v) {
      c.dual_encoder.model.projection_dim = parse_size("projection_dim", v, 1, 4096);
    };
    s["dual_encoder.reduction"] = [](PipelineConfig& c, const std::string& v) {
      if (v == "weighted_mean") {
        c.dual_encoder.trainer.loss.reduction = LossReduction::weighted_mean;
      } else if (v == "sum") {
        c.dual_encoder.trainer.loss.reduction = LossReduction::sum;
      } else {
        bad_value("reduction", v, "weighted_mean or sum");
      }
    };
    s["dual_encoder.curve_every"] = [](PipelineConfig& c, const std::string& v) {
      c.dual_encoder.trainer.curve_every = parse_size("curve_every", v, 0, kBig);
    };
    s["dual_encoder.negative_ratio"] = [](PipelineConfig& c, const std::string& v) {
      c.dual_encoder.negative_ratio = parse_size("negative_ratio", v, 1, 100);
    };
    s["dual_encoder.use_weights"] = [](PipelineConfig& c, const std::string& v) {
      c.dual_encoder.use_weights = parse_bool("use_weights", v);
    };
    s["dual_encoder.pretrained_embeddings"] = [](PipelineConfig& c, const std::string& v) {
      if (v.empty()) {
        c.dual_encoder.pretrained_embeddings.reset();
      } else {
        c.dual_encoder.pretrained_embeddings = v;
      }
    };

    s["eval.m"] = [](PipelineConfig& c, const std::string& v) { c.eval.m = parse_size("m", v, 2, 100000); };
    s["eval.at"] = [](PipelineConfig& c, const std::string& v) { c.eval.at = parse_rank_list(v); };
    s["eval.questions_only"] = [](PipelineConfig& c, const std::string& v) {
      c.eval.questions_only = parse_bool("questions_only", v);
    };

    s["synth.dialogues"] = [](PipelineConfig& c, const std::string& v) {
      c.synth.dialogues = parse_size("dialogues", v, 0, kBig);
    };
    s["synth.high_quality_fraction"] = [](PipelineConfig& c, const std::string& v) {
      c.synth.high_quality_fraction = parse_double("high_quality_fraction", v, 0.0, 1.0);
    };
    s["synth.noise_fraction"] = [](PipelineConfig& c, const std::string& v) {
      c.synth.noise_fraction = parse_double("noise_fraction", v, 0.0, 1.0);
    };
    s["synth.noise_types"] = [](PipelineConfig& c, const std::string& v) {
      c.synth.noise_types.clear();
      for (const auto& t : parse_list(v)) c.synth.noise_types.push_back(parse_noise_type(t));
    };
    s["synth.topics"] = [](PipelineConfig& c, const std::string& v) {
      c.synth.topics = parse_size("topics", v, 2, 10000);
    };
    s["synth.words_per_topic"] = [](PipelineConfig& c, const std::string& v) {
      c.synth.words_per_topic = parse_size("words_per_topic", v, 1, 1000);
    };
    s["synth.echo_probability"] = [](PipelineConfig& c, const std::string& v) {
      c.synth.echo_probability = parse_double("echo_probability", v, 0.0, 1.0);
    };
    s["synth.validation_dialogues"] = [](PipelineConfig& c, const std::string& v) {
      c.synth.validation_dialogues = parse_size("validation_dialogues", v, 0, kBig);
    };
    s["synth.test_dialogues"] = [](PipelineConfig& c, const std::string& v) {
      c.synth.test_dialogues = parse_size("test_dialogues", v, 0, kBig);
    };
    return s;
  }();
  return table;
}

}  // namespace

PipelineConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }

  PipelineConfig config = default_config();
  const auto& table = schema();
  for (const auto& [section, keys] : tree) {
    if (keys.empty() && !keys.data().empty()) throw ConfigError("key '" + section + "' outside any section");
    for (const auto& [key, value] : keys) {
      const std::string name = section + "." + key;
      auto it = table.find(name);
      if (it == table.end()) throw ConfigError("unknown config key '" + name + "'");
      it->second(config, value.data());
    }
  }
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace dialweight
