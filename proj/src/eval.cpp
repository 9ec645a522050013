#include "dialweight/eval.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "dialweight/error.hpp"
#include "dialweight/text.hpp"

namespace dialweight {

std::vector<std::size_t> parse_rank_list(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& field : split(text, ',')) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(field, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || used != field.size() || v == 0) throw ConfigError("bad rank list '" + text + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty rank list");
  return out;
}

EvalTask build_candidate_sets(const std::vector<EncodedPair>& queries,
                              const std::vector<std::vector<int>>& response_pool, std::size_t m,
                              std::vector<std::size_t> at, std::uint64_t seed) {
  if (m < 2) throw ConfigError("m must be at least 2");
  std::sort(at.begin(), at.end());
  at.erase(std::unique(at.begin(), at.end()), at.end());
  if (at.empty() || at.front() < 1 || at.back() > m) {
    throw ConfigError("ranks must lie in [1, " + std::to_string(m) + "]");
  }
  if (response_pool.size() < m) {
    throw DataError("response pool of " + std::to_string(response_pool.size()) +
                    " is smaller than m = " + std::to_string(m));
  }

  EvalTask task;
  task.m = m;
  task.at = std::move(at);
  task.seed = seed;
  task.queries.reserve(queries.size());
  Rng rng(seed);

  for (const auto& q : queries) {
    std::set<std::vector<int>> taken = {q.response_ids};
    std::vector<std::vector<int>> candidates = {q.response_ids};
    const std::size_t budget = 64 * m;
    for (std::size_t attempt = 0; attempt < budget && candidates.size() < m; ++attempt) {
      const auto& r = response_pool[rng.below(response_pool.size())];
      if (taken.insert(r).second) candidates.push_back(r);
    }
    if (candidates.size() < m) {
      // The pool is dominated by repeats; sweep it in a random order instead.
      std::vector<std::size_t> order(response_pool.size());
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(order);
      for (std::size_t k = 0; k < order.size() && candidates.size() < m; ++k) {
        const auto& r = response_pool[order[k]];
        if (taken.insert(r).second) candidates.push_back(r);
      }
    }
    if (candidates.size() < m) {
      throw DataError("response pool has fewer than " + std::to_string(m - 1) +
                      " responses distinct from a query's true response");
    }

    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    EvalQuery eq;
    eq.context = q.context_ids;
    eq.candidates.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      eq.candidates[k] = std::move(candidates[perm[k]]);
      if (perm[k] == 0) eq.true_index = k;
    }
    task.queries.push_back(std::move(eq));
  }
  return task;
}

std::vector<std::size_t> rank_candidates(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

std::map<std::size_t, double> recall_from_ranks(const std::vector<std::size_t>& ranks,
                                                const std::vector<std::size_t>& at) {
  std::map<std::size_t, double> recall;
  for (std::size_t i : at) {
    const auto hits = std::count_if(ranks.begin(), ranks.end(), [i](std::size_t r) { return r < i; });
    recall[i] = ranks.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(ranks.size());
  }
  return recall;
}

EvaluationReport recall_at(const EvalTask& task, const ResponseScorer& scorer, const std::string& model) {
  EvaluationReport report;
  report.model = model;
  report.m = task.m;
  report.at = task.at;
  report.seed = task.seed;
  report.ranks.reserve(task.queries.size());
  std::vector<double> scores;
  for (const auto& q : task.queries) {
    scores.clear();
    for (const auto& c : q.candidates) scores.push_back(scorer(q.context, c));
    const std::vector<std::size_t> order = rank_candidates(scores);
    const auto pos = std::find(order.begin(), order.end(), q.true_index) - order.begin();
    report.ranks.push_back(static_cast<std::size_t>(pos));
  }
  report.recall = recall_from_ranks(report.ranks, report.at);
  return report;
}

nlohmann::json to_json(const EvaluationReport& r) {
  nlohmann::json recall = nlohmann::json::object();
  for (const auto& [i, v] : r.recall) recall[std::to_string(i)] = v;
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& p : r.curve) curve.push_back({p.examples_seen, p.validation_accuracy});
  return {{"model", r.model}, {"m", r.m},         {"at", r.at},       {"seed", r.seed},
          {"queries", r.ranks.size()}, {"recall", recall}, {"ranks", r.ranks}, {"curve", curve}};
}

EvaluationReport evaluation_report_from_json(const nlohmann::json& j) {
  try {
    EvaluationReport r;
    r.model = j.at("model").get<std::string>();
    r.m = j.at("m").get<std::size_t>();
    r.at = j.at("at").get<std::vector<std::size_t>>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [k, v] : j.at("recall").items()) r.recall[std::stoul(k)] = v.get<double>();
    r.ranks = j.at("ranks").get<std::vector<std::size_t>>();
    if (j.contains("curve")) {
      for (const auto& p : j.at("curve")) r.curve.push_back({p.at(0).get<std::size_t>(), p.at(1).get<double>()});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed evaluation report: ") + e.what());
  } catch (const std::logic_error& e) {
    throw DataError(std::string("malformed evaluation report: ") + e.what());
  }
}

bool context_ends_with_question(const std::vector<int>& context_ids, const Vocabulary& vocab) {
  for (auto it = context_ids.rbegin(); it != context_ids.rend(); ++it) {
    const std::string& t = vocab.token(*it);
    if (is_tag_token(t)) continue;
    return t == "?";
  }
  return false;
}

}  // namespace dialweight
