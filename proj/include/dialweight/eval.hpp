#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dialweight/preprocess.hpp"
#include "dialweight/rng.hpp"
#include "dialweight/training.hpp"

namespace dialweight {

struct EvalQuery {
  std::vector<int> context;
  std::vector<std::vector<int>> candidates;  // m response id sequences
  std::size_t true_index = 0;                // position of the true response
};

struct EvalTask {
  std::size_t m = 10;
  std::vector<std::size_t> at = {1, 2, 5};
  std::uint64_t seed = 0;
  std::vector<EvalQuery> queries;
};

// Parses "1,2,5". Throws ConfigError on anything else.
std::vector<std::size_t> parse_rank_list(const std::string& text);

// Each query's candidates are its true response plus m-1 responses drawn
// without replacement from `pool`, all distinct in content from each other
// and from the true response, then shuffled. Throws ConfigError for m < 2 or
// a rank outside [1, m], and DataError when the pool cannot supply m-1
// distinct alternatives.
EvalTask build_candidate_sets(const std::vector<EncodedPair>& queries,
                              const std::vector<std::vector<int>>& response_pool, std::size_t m,
                              std::vector<std::size_t> at, std::uint64_t seed);

// Indices sorted by descending score; equal scores keep ascending index order.
std::vector<std::size_t> rank_candidates(std::span<const double> scores);

using ResponseScorer = std::function<double(const std::vector<int>& context, const std::vector<int>& response)>;

struct EvaluationReport {
  std::string model;
  std::size_t m = 0;
  std::vector<std::size_t> at;
  std::uint64_t seed = 0;
  std::map<std::size_t, double> recall;  // i -> Recall_m@i
  std::vector<std::size_t> ranks;        // 0-based rank of the true response, per query
  std::vector<CurvePoint> curve;         // optional learning curve of the model
};

// Recall_m@i = fraction of queries whose true response ranks within the top i.
EvaluationReport recall_at(const EvalTask& task, const ResponseScorer& scorer, const std::string& model);

// Recomputes the recall table from per-query ranks.
std::map<std::size_t, double> recall_from_ranks(const std::vector<std::size_t>& ranks,
                                                const std::vector<std::size_t>& at);

nlohmann::json to_json(const EvaluationReport& r);
EvaluationReport evaluation_report_from_json(const nlohmann::json& j);

// True when the last context token that is not a tag is "?".
bool context_ends_with_question(const std::vector<int>& context_ids, const Vocabulary& vocab);

}  // namespace dialweight
