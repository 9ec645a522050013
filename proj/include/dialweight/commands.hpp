#pragma once

// The subcommands of the `dialweight` tool. Each reads and writes files and
// throws the library's Error subclasses; exit codes are chosen by the caller.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dialweight/config.hpp"
#include "dialweight/eval.hpp"

namespace dialweight {

struct CommandContext {
  PipelineConfig config = default_config();
  std::uint64_t seed = 1;
  bool verbose = false;
  std::ostream* log = nullptr;  // progress messages when verbose
};

using Path = std::filesystem::path;

// FNV-1a of a file's bytes, as 16 hex digits.
std::string file_fingerprint(const Path& path);

// Writes corpus.jsonl, validation.jsonl, test.jsonl and ground_truth.json.
void cmd_synth(const CommandContext& ctx, const Path& out_dir);

// Writes pairs.jsonl, high_quality.jsonl, vocab.txt, tfidf.json and
// manifest.json. With `vocab` the given vocabulary is used instead of
// building one.
void cmd_prepare(const CommandContext& ctx, const std::vector<Path>& inputs, const Path& out_dir,
                 const std::optional<Path>& vocab);

struct TrainWeighterArgs {
  Path positives;
  Path pool;
  Path out;
  std::optional<Path> vocab;  // default: vocab.txt next to the positives
};
void cmd_train_weighter(const CommandContext& ctx, const TrainWeighterArgs& args);

struct WeighArgs {
  Path model;
  Path pairs;
  Path out;
  std::optional<Path> vocab;
};
void cmd_weigh(const CommandContext& ctx, const WeighArgs& args);

struct TrainArgs {
  Path pairs;
  std::optional<Path> weights_from;  // weighed pair file aligned with `pairs`
  std::optional<Path> validation;
  std::optional<Path> pool;          // negative responses, default `pairs`
  std::optional<Path> vocab;
  std::optional<Path> curve;         // CSV examples_seen,validation_accuracy
  Path out;
};
void cmd_train(const CommandContext& ctx, const TrainArgs& args);

struct EvaluateArgs {
  std::optional<Path> model;
  std::optional<Path> tfidf;
  Path pairs;
  std::optional<Path> pool;
  std::optional<Path> vocab;
  std::optional<Path> curve;  // attached to the report for plotting
  std::optional<std::string> name;
  std::optional<std::size_t> m;
  std::optional<std::string> at;
  std::optional<std::uint64_t> eval_seed;
  Path out;
};
void cmd_evaluate(const CommandContext& ctx, const EvaluateArgs& args);

// Ranks each query's candidate set (built as for evaluation) and writes one
// JSON line per query with the candidate order and scores.
struct RankArgs {
  Path model;
  Path queries;
  std::optional<Path> vocab;
  Path out;
};
void cmd_rank(const CommandContext& ctx, const RankArgs& args);

// Writes table.txt, table.json and one curve_<model>.csv per report with a
// curve; prints the table to `out`.
void cmd_report(const std::vector<Path>& reports, const Path& out_dir, std::ostream& out);

// Table text for reports sharing m and the rank list. Throws ConfigError
// when they do not.
std::string format_report_table(const std::vector<EvaluationReport>& reports);

}  // namespace dialweight
