#include "dialweight/commands.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "dialweight/checkpoint.hpp"
#include "dialweight/error.hpp"
#include "dialweight/pipeline.hpp"
#include "dialweight/rng.hpp"
#include "dialweight/synth.hpp"
#include "dialweight/text.hpp"
#include "dialweight/weighter.hpp"

namespace dialweight {

namespace {

void note(const CommandContext& ctx, const std::string& message) {
  if (ctx.verbose && ctx.log) *ctx.log << message << '\n';
}

std::string read_file(const Path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const Path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << bytes;
}

void write_json(const Path& path, const nlohmann::json& j) { write_file(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const Path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path.string() + ": malformed JSON: " + e.what());
  }
}

// Prefixes file-level errors with the file name, keeping the error class.
template <typename Fn>
auto with_file(const Path& path, Fn&& fn) {
  try {
    return fn();
  } catch (const FingerprintMismatch&) {
    throw;
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<DialoguePair> load_pairs(const Path& path) {
  return with_file(path, [&] { return read_pair_file(path); });
}

Vocabulary resolve_vocab(const std::optional<Path>& explicit_path, const Path& sibling_of) {
  Path path = explicit_path ? *explicit_path : sibling_of.parent_path() / "vocab.txt";
  if (!std::filesystem::exists(path)) {
    throw ConfigError("no vocabulary at " + path.string() + "; pass --vocab");
  }
  return with_file(path, [&] { return Vocabulary::load(path); });
}

std::vector<EncodedPair> encode(const CommandContext& ctx, const std::vector<DialoguePair>& pairs,
                                const Vocabulary& vocab) {
  return encode_pairs(pairs, vocab, ctx.config.limits);
}

std::size_t feature_dim(const std::vector<EncodedPair>& pairs) {
  if (pairs.empty()) return 2;
  const std::size_t n = pairs.front().features.size();
  for (const auto& p : pairs) {
    if (p.features.size() != n) throw DataError("pairs carry feature vectors of different lengths");
  }
  return n;
}

void check_fingerprint(std::uint64_t expected, std::uint64_t actual, const std::string& what) {
  if (expected != actual) {
    throw FingerprintMismatch(what + " was built against vocabulary " + hex64(expected) +
                              " but the pairs use vocabulary " + hex64(actual));
  }
}

nlohmann::json log_to_json(const TrainingLog& log) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : log.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"validation_loss", e.validation_loss},
                      {"validation_accuracy", e.validation_accuracy}});
  }
  return {{"epochs", epochs}, {"best_epoch", log.best_epoch}, {"stopped_early", log.stopped_early}};
}

std::string curve_csv(const std::vector<CurvePoint>& curve) {
  std::string out = "examples_seen,validation_accuracy\n";
  char buf[64];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%zu,%.6f\n", p.examples_seen, p.validation_accuracy);
    out += buf;
  }
  return out;
}

std::vector<CurvePoint> parse_curve_csv(const Path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::vector<CurvePoint> out;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (n == 1 || line.empty()) continue;
    const auto cells = split(line, ',');
    try {
      if (cells.size() != 2) throw std::invalid_argument("two columns expected");
      out.push_back({std::stoull(cells[0]), std::stod(cells[1])});
    } catch (const std::logic_error&) {
      throw ParseError(n, path.string() + ": expected examples_seen,validation_accuracy");
    }
  }
  return out;
}

std::string safe_name(const std::string& name) {
  std::string out;
  for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

}  // namespace

std::string file_fingerprint(const Path& path) { return hex64(fnv1a64(read_file(path))); }

void cmd_synth(const CommandContext& ctx, const Path& out_dir) {
  const SynthCorpus corpus = generate_corpus(ctx.config.synth, derive_seed(ctx.seed, "synth"));
  std::filesystem::create_directories(out_dir);
  auto dump = [&](const std::string& name, const std::vector<Dialogue>& dialogues) {
    std::ostringstream out;
    write_dialogues(out, dialogues);
    write_file(out_dir / name, out.str());
  };
  dump("corpus.jsonl", corpus.corpus);
  dump("validation.jsonl", corpus.validation);
  dump("test.jsonl", corpus.test);
  write_json(out_dir / "ground_truth.json", ground_truth_json(corpus));
  note(ctx, "synth: " + std::to_string(corpus.corpus.size()) + " dialogues, " +
                std::to_string(corpus.plan.counts.at(SynthKind::planted)) + " planted");
}

void cmd_prepare(const CommandContext& ctx, const std::vector<Path>& inputs, const Path& out_dir,
                 const std::optional<Path>& vocab_path) {
  std::vector<Dialogue> dialogues;
  for (const auto& path : inputs) {
    auto part = with_file(path, [&] { return parse_dialogue_file(path); });
    for (auto& d : part) dialogues.push_back(std::move(d));
  }
  std::optional<Vocabulary> fixed;
  if (vocab_path) fixed = with_file(*vocab_path, [&] { return Vocabulary::load(*vocab_path); });

  PreparedCorpus prepared = prepare_corpus(dialogues, ctx.config, fixed ? &*fixed : nullptr);
  std::filesystem::create_directories(out_dir);

  std::ostringstream pairs;
  write_pairs(pairs, prepared.pairs);
  write_file(out_dir / "pairs.jsonl", pairs.str());
  std::ostringstream hq;
  write_pairs(hq, prepared.high_quality);
  write_file(out_dir / "high_quality.jsonl", hq.str());
  write_file(out_dir / "vocab.txt", prepared.vocab.serialize());

  const TfIdfIndex index = build_tfidf_index(encode(ctx, prepared.pairs, prepared.vocab), prepared.vocab);
  write_json(out_dir / "tfidf.json", index.to_json(prepared.vocab.fingerprint()));

  nlohmann::json files = nlohmann::json::object();
  for (const char* name : {"pairs.jsonl", "high_quality.jsonl", "vocab.txt", "tfidf.json"}) {
    files[name] = file_fingerprint(out_dir / name);
  }
  prepared.manifest["files"] = files;
  write_json(out_dir / "manifest.json", prepared.manifest);
  note(ctx, "prepare: " + std::to_string(prepared.pairs.size()) + " pairs, " +
                std::to_string(prepared.high_quality.size()) + " high quality");
}

void cmd_train_weighter(const CommandContext& ctx, const TrainWeighterArgs& args) {
  const Vocabulary vocab = resolve_vocab(args.vocab, args.positives);
  const auto positives = encode(ctx, load_pairs(args.positives), vocab);
  const auto pool = encode(ctx, load_pairs(args.pool), vocab);

  WeighterTrainingConfig config = ctx.config.weighter;
  config.model.vocab_size = vocab.size();
  config.model.feature_dim = feature_dim(positives);
  if (!pool.empty() && feature_dim(pool) != config.model.feature_dim) {
    throw DataError("positives and pool carry feature vectors of different lengths");
  }
  const auto result = train_weighter(positives, pool, config, derive_seed(ctx.seed, "weighter"));

  save_checkpoint(args.out, result.model.to_checkpoint(vocab.fingerprint(), &result.optimizer));
  nlohmann::json log = log_to_json(result.log);
  std::set<int> classes;
  for (const auto& ex : result.validation) classes.insert(ex.label);
  log["validation_auc"] = classes.size() == 2 ? nlohmann::json(roc_auc(result.model, result.validation))
                                              : nlohmann::json(nullptr);
  write_json(Path(args.out.string() + ".log.json"), log);
  note(ctx, "train-weighter: " + std::to_string(result.log.epochs.size()) + " epochs, best " +
                std::to_string(result.log.best_epoch));
}

void cmd_weigh(const CommandContext& ctx, const WeighArgs& args) {
  const Checkpoint ckpt = with_file(args.model, [&] { return load_checkpoint(args.model); });
  const WeightingModel model = WeightingModel::from_checkpoint(ckpt);
  const Vocabulary vocab = resolve_vocab(args.vocab, args.pairs);
  std::vector<DialoguePair> pairs = load_pairs(args.pairs);
  const auto weighted = assign_weights(model, ckpt.vocab_fingerprint, vocab.fingerprint(), encode(ctx, pairs, vocab));
  for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i].weight = weighted[i].weight;

  std::ostringstream out;
  write_pairs(out, pairs);
  write_file(args.out, out.str());
  write_json(Path(args.out.string() + ".manifest.json"),
             {{"pairs", pairs.size()},
              {"model", file_fingerprint(args.model)},
              {"input", file_fingerprint(args.pairs)},
              {"output", file_fingerprint(args.out)}});
  note(ctx, "weigh: " + std::to_string(pairs.size()) + " pairs");
}

void cmd_train(const CommandContext& ctx, const TrainArgs& args) {
  const Vocabulary vocab = resolve_vocab(args.vocab, args.pairs);
  std::vector<DialoguePair> pairs = load_pairs(args.pairs);
  for (auto& p : pairs) p.weight.reset();
  if (args.weights_from) {
    const auto weighed = load_pairs(*args.weights_from);
    if (weighed.size() != pairs.size()) {
      throw DataError(args.weights_from->string() + " has " + std::to_string(weighed.size()) +
                      " pairs, expected " + std::to_string(pairs.size()));
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (weighed[i].source_id != pairs[i].source_id || !same_tokens(weighed[i].response, pairs[i].response)) {
        throw DataError(args.weights_from->string() + " line " + std::to_string(i + 1) +
                        ": pair does not match the training pairs");
      }
      if (!weighed[i].weight) {
        throw DataError(args.weights_from->string() + " line " + std::to_string(i + 1) + ": no weight");
      }
      pairs[i].weight = weighed[i].weight;
    }
  }
  const auto encoded = encode(ctx, pairs, vocab);
  const auto pool = args.pool ? encode(ctx, load_pairs(*args.pool), vocab) : encoded;
  if (encoded.empty()) throw DataError(args.pairs.string() + ": no training pairs");

  const auto& settings = ctx.config.dual_encoder;
  const std::uint64_t seed = derive_seed(ctx.seed, "dual_encoder");
  const bool weighted = settings.use_weights && args.weights_from.has_value();
  const auto train = conversation_examples(encoded, pool, settings.negative_ratio, weighted, seed);
  std::vector<TrainingExample> validation;
  if (args.validation) {
    const auto val = encode(ctx, load_pairs(*args.validation), vocab);
    validation = conversation_examples(val, val, 1, false, derive_seed(ctx.seed, "validation"));
  }

  DualEncoderConfig model_config = settings.model;
  model_config.vocab_size = vocab.size();
  std::optional<Tensor> embeddings;
  if (settings.pretrained_embeddings) {
    const Path& path = *settings.pretrained_embeddings;
    DualEncoder fresh(model_config, derive_seed(seed, "init"));
    embeddings = fresh.params().value("embedding");
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    const std::size_t loaded = with_file(path, [&] { return load_pretrained_embeddings(in, vocab, *embeddings); });
    note(ctx, "train: " + std::to_string(loaded) + " pretrained embedding rows");
  }

  const auto result = train_dual_encoder(train, validation, model_config, settings.trainer, seed,
                                         embeddings ? &*embeddings : nullptr);
  save_checkpoint(args.out, result.model.to_checkpoint(vocab.fingerprint(), &result.optimizer));
  nlohmann::json log = log_to_json(result.log);
  log["weighted"] = weighted;
  log["examples"] = train.size();
  write_json(Path(args.out.string() + ".log.json"), log);
  if (args.curve) write_file(*args.curve, curve_csv(result.log.curve));
  note(ctx, std::string("train: ") + (weighted ? "weighted" : "unweighted") + ", " +
                std::to_string(result.log.epochs.size()) + " epochs");
}

void cmd_evaluate(const CommandContext& ctx, const EvaluateArgs& args) {
  if (args.model.has_value() == args.tfidf.has_value()) {
    throw ConfigError("evaluate needs exactly one of --model and --tfidf");
  }
  const Vocabulary vocab = resolve_vocab(args.vocab, args.pairs);

  std::optional<TfIdfIndex> index;
  std::optional<DualEncoder> model;
  if (args.tfidf) {
    std::uint64_t fp = 0;
    index = with_file(*args.tfidf, [&] { return TfIdfIndex::load(*args.tfidf, &fp); });
    check_fingerprint(fp, vocab.fingerprint(), "TF-IDF index " + args.tfidf->string());
  } else {
    const Checkpoint ckpt = with_file(*args.model, [&] { return load_checkpoint(*args.model); });
    check_fingerprint(ckpt.vocab_fingerprint, vocab.fingerprint(), "model " + args.model->string());
    model = DualEncoder::from_checkpoint(ckpt);
  }

  const auto queries = encode(ctx, load_pairs(args.pairs), vocab);
  const auto pool = args.pool ? encode(ctx, load_pairs(*args.pool), vocab) : queries;
  EvalSettings settings = ctx.config.eval;
  if (args.m) settings.m = *args.m;
  if (args.at) settings.at = parse_rank_list(*args.at);
  const std::uint64_t eval_seed = args.eval_seed ? *args.eval_seed : derive_seed(ctx.seed, "eval");
  const EvalTask task = make_eval_task(queries, pool, settings, vocab, eval_seed);

  EvaluationReport report = index ? recall_at(task, tfidf_scorer(*index, vocab), args.name.value_or("tfidf"))
                                  : recall_at(task, dual_encoder_scorer(*model),
                                              args.name.value_or(args.model->stem().string()));
  if (args.curve) report.curve = parse_curve_csv(*args.curve);
  write_json(args.out, to_json(report));
  note(ctx, "evaluate: " + report.model + " on " + std::to_string(task.queries.size()) + " queries");
}

void cmd_rank(const CommandContext& ctx, const RankArgs& args) {
  const Checkpoint ckpt = with_file(args.model, [&] { return load_checkpoint(args.model); });
  const Vocabulary vocab = resolve_vocab(args.vocab, args.queries);
  check_fingerprint(ckpt.vocab_fingerprint, vocab.fingerprint(), "model " + args.model.string());
  const DualEncoder model = DualEncoder::from_checkpoint(ckpt);
  const auto queries = encode(ctx, load_pairs(args.queries), vocab);
  const EvalTask task = make_eval_task(queries, queries, ctx.config.eval, vocab, derive_seed(ctx.seed, "eval"));

  std::ostringstream out;
  for (std::size_t q = 0; q < task.queries.size(); ++q) {
    const auto& query = task.queries[q];
    std::vector<double> scores;
    for (const auto& c : query.candidates) scores.push_back(model.score(query.context, c));
    const auto order = rank_candidates(scores);
    std::size_t rank = 0;
    while (order[rank] != query.true_index) ++rank;
    out << nlohmann::json{{"query", q},
                          {"true_index", query.true_index},
                          {"rank", rank},
                          {"order", order},
                          {"scores", scores}}
               .dump()
        << '\n';
  }
  write_file(args.out, out.str());
}

std::string format_report_table(const std::vector<EvaluationReport>& reports) {
  if (reports.empty()) throw ConfigError("report needs at least one evaluation report");
  const auto& first = reports.front();
  std::size_t width = 5;
  for (const auto& r : reports) {
    if (r.m != first.m || r.at != first.at) {
      throw ConfigError("report '" + r.model + "' uses m=" + std::to_string(r.m) +
                        " or a rank list different from '" + first.model + "'");
    }
    width = std::max(width, r.model.size());
  }
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "model";
  for (std::size_t i : first.at) {
    out << "  " << std::setw(12) << ("R" + std::to_string(first.m) + "@" + std::to_string(i));
  }
  out << '\n';
  for (const auto& r : reports) {
    out << std::left << std::setw(static_cast<int>(width)) << r.model;
    for (std::size_t i : first.at) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", r.recall.at(i));
      out << "  " << std::setw(12) << buf;
    }
    out << '\n';
  }
  return out.str();
}

void cmd_report(const std::vector<Path>& paths, const Path& out_dir, std::ostream& out) {
  std::vector<EvaluationReport> reports;
  for (const auto& p : paths) {
    reports.push_back(with_file(p, [&] {
      try {
        return evaluation_report_from_json(read_json(p));
      } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("not an evaluation report: ") + e.what());
      }
    }));
  }
  const std::string table = format_report_table(reports);

  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json recall = nlohmann::json::object();
    for (const auto& [i, v] : r.recall) recall[std::to_string(i)] = v;
    rows.push_back({{"model", r.model}, {"recall", recall}, {"queries", r.ranks.size()}});
  }
  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "table.txt", table);
  write_json(out_dir / "table.json", {{"m", reports.front().m}, {"at", reports.front().at}, {"rows", rows}});
  for (const auto& r : reports) {
    if (!r.curve.empty()) write_file(out_dir / ("curve_" + safe_name(r.model) + ".csv"), curve_csv(r.curve));
  }
  out << table;
}

}  // namespace dialweight
