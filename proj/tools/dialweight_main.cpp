// dialweight: command-line front end.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
// 3 numerical failure during training.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dialweight/commands.hpp"
#include "dialweight/error.hpp"

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kNumerical = 3;

template <typename T>
std::optional<T> opt(const CLI::Option* o, const T& value) {
  return o->count() ? std::optional<T>(value) : std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  using dialweight::Path;

  CLI::App app{"Instance-weighted training of retrieval dialogue models"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 1;
  bool verbose = false;
  app.add_option("--config", config_path, "INI configuration file");
  app.add_option("--seed", seed, "Top-level seed");
  app.add_flag("-v,--verbose", verbose, "Print progress to stderr");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with planted high-quality dialogues");
  std::string synth_out;
  synth->add_option("--out", synth_out, "Output directory")->required();

  // prepare
  auto* prepare = app.add_subcommand("prepare", "Extract, select and encode pairs from dialogue JSONL");
  std::vector<std::string> prepare_inputs;
  std::string prepare_out, prepare_vocab;
  prepare->add_option("inputs", prepare_inputs, "Dialogue JSONL files")->required()->check(CLI::ExistingFile);
  prepare->add_option("--out", prepare_out, "Output directory")->required();
  auto* prepare_vocab_opt = prepare->add_option("--vocab", prepare_vocab, "Use this vocabulary");

  // train-weighter
  auto* train_weighter = app.add_subcommand("train-weighter", "Train the weighting model");
  std::string tw_positives, tw_pool, tw_out, tw_vocab;
  train_weighter->add_option("--positives", tw_positives, "High-quality pair JSONL")->required();
  train_weighter->add_option("--pool", tw_pool, "Pair JSONL supplying negative responses")->required();
  train_weighter->add_option("--out", tw_out, "Checkpoint path")->required();
  auto* tw_vocab_opt = train_weighter->add_option("--vocab", tw_vocab, "Vocabulary file");

  // weigh
  auto* weigh = app.add_subcommand("weigh", "Attach weights to pairs");
  std::string w_model, w_pairs, w_out, w_vocab;
  weigh->add_option("--model", w_model, "Weighter checkpoint")->required();
  weigh->add_option("--pairs", w_pairs, "Pair JSONL")->required();
  weigh->add_option("--out", w_out, "Weighed pair JSONL")->required();
  auto* w_vocab_opt = weigh->add_option("--vocab", w_vocab, "Vocabulary file");

  // train
  auto* train = app.add_subcommand("train", "Train a Dual Encoder");
  std::string t_pairs, t_weights, t_validation, t_pool, t_vocab, t_curve, t_out;
  train->add_option("--pairs", t_pairs, "Training pair JSONL")->required();
  auto* t_weights_opt = train->add_option("--weights-from", t_weights, "Weighed pair JSONL");
  auto* t_validation_opt = train->add_option("--validation", t_validation, "Validation pair JSONL");
  auto* t_pool_opt = train->add_option("--pool", t_pool, "Pair JSONL supplying negative responses");
  auto* t_vocab_opt = train->add_option("--vocab", t_vocab, "Vocabulary file");
  auto* t_curve_opt = train->add_option("--curve", t_curve, "Learning-curve CSV");
  train->add_option("--out", t_out, "Checkpoint path")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Recall_m@i of a model on held-out pairs");
  std::string e_model, e_tfidf, e_pairs, e_pool, e_vocab, e_curve, e_name, e_at, e_out;
  std::size_t e_m = 0;
  std::uint64_t e_seed = 0;
  auto* e_model_opt = evaluate->add_option("--model", e_model, "Dual Encoder checkpoint");
  auto* e_tfidf_opt = evaluate->add_option("--tfidf", e_tfidf, "TF-IDF index");
  e_model_opt->excludes(e_tfidf_opt);
  evaluate->add_option("--pairs", e_pairs, "Query pair JSONL")->required();
  auto* e_pool_opt = evaluate->add_option("--pool", e_pool, "Pair JSONL supplying distractors");
  auto* e_vocab_opt = evaluate->add_option("--vocab", e_vocab, "Vocabulary file");
  auto* e_curve_opt = evaluate->add_option("--curve", e_curve, "Learning-curve CSV to attach");
  auto* e_name_opt = evaluate->add_option("--name", e_name, "Model name in the report");
  auto* e_m_opt = evaluate->add_option("--m", e_m, "Candidate set size");
  auto* e_at_opt = evaluate->add_option("--at", e_at, "Ranks to report, e.g. 1,2,5");
  auto* e_seed_opt = evaluate->add_option("--seed", e_seed, "Candidate sampling seed (default: derived from the global seed)");
  evaluate->add_option("--out", e_out, "Report JSON")->required();

  // rank
  auto* rank = app.add_subcommand("rank", "Rank candidate responses for each query");
  std::string r_model, r_queries, r_vocab, r_out;
  rank->add_option("--model", r_model, "Dual Encoder checkpoint")->required();
  rank->add_option("--queries", r_queries, "Query pair JSONL")->required();
  auto* r_vocab_opt = rank->add_option("--vocab", r_vocab, "Vocabulary file");
  rank->add_option("--out", r_out, "Ranking JSONL")->required();

  // report
  auto* report = app.add_subcommand("report", "Compare evaluation reports");
  std::vector<std::string> rep_inputs;
  std::string rep_out;
  report->add_option("reports", rep_inputs, "Report JSON files")->required();
  report->add_option("--out", rep_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    dialweight::CommandContext ctx;
    if (!config_path.empty()) ctx.config = dialweight::load_config(config_path);
    ctx.seed = seed;
    ctx.verbose = verbose;
    ctx.log = &std::cerr;

    if (*synth) {
      dialweight::cmd_synth(ctx, synth_out);
    } else if (*prepare) {
      std::vector<Path> inputs(prepare_inputs.begin(), prepare_inputs.end());
      dialweight::cmd_prepare(ctx, inputs, prepare_out, opt<Path>(prepare_vocab_opt, prepare_vocab));
    } else if (*train_weighter) {
      dialweight::cmd_train_weighter(ctx, {tw_positives, tw_pool, tw_out, opt<Path>(tw_vocab_opt, tw_vocab)});
    } else if (*weigh) {
      dialweight::cmd_weigh(ctx, {w_model, w_pairs, w_out, opt<Path>(w_vocab_opt, w_vocab)});
    } else if (*train) {
      dialweight::cmd_train(ctx, {t_pairs, opt<Path>(t_weights_opt, t_weights),
                                  opt<Path>(t_validation_opt, t_validation), opt<Path>(t_pool_opt, t_pool),
                                  opt<Path>(t_vocab_opt, t_vocab), opt<Path>(t_curve_opt, t_curve), t_out});
    } else if (*evaluate) {
      dialweight::EvaluateArgs args;
      args.model = opt<Path>(e_model_opt, e_model);
      args.tfidf = opt<Path>(e_tfidf_opt, e_tfidf);
      args.pairs = e_pairs;
      args.pool = opt<Path>(e_pool_opt, e_pool);
      args.vocab = opt<Path>(e_vocab_opt, e_vocab);
      args.curve = opt<Path>(e_curve_opt, e_curve);
      args.name = opt(e_name_opt, e_name);
      args.m = opt(e_m_opt, e_m);
      args.at = opt(e_at_opt, e_at);
      args.eval_seed = opt(e_seed_opt, e_seed);
      args.out = e_out;
      dialweight::cmd_evaluate(ctx, args);
    } else if (*rank) {
      dialweight::cmd_rank(ctx, {r_model, r_queries, opt<Path>(r_vocab_opt, r_vocab), r_out});
    } else if (*report) {
      std::vector<Path> inputs(rep_inputs.begin(), rep_inputs.end());
      dialweight::cmd_report(inputs, rep_out, std::cout);
    }
  } catch (const dialweight::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const dialweight::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const dialweight::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return 0;
}
