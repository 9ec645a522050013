#include "dialweight/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dialweight/error.hpp"
#include "dialweight/layers.hpp"

namespace dialweight {

std::vector<TrainingExample> to_training_examples(const std::vector<EncodedPair>& pairs) {
  std::vector<TrainingExample> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (!p.label) throw DataError("pair from '" + p.source_id + "' has no label");
    out.push_back({p, *p.label, p.weight.value_or(1.0)});
  }
  return out;
}

namespace {

void check_batch(const std::vector<TrainingExample>& batch, const LossOptions& options) {
  if (batch.empty()) throw DataError("empty training batch");
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double w = batch[i].weight;
    const bool ok = options.allow_zero_weights ? w >= 0.0 : w > 0.0;
    if (!ok || !std::isfinite(w)) {
      throw DataError("example " + std::to_string(i) + " has invalid weight " + std::to_string(w));
    }
  }
}

// Per-example multiplier that turns sum_i c_i L_i into the requested loss.
std::vector<double> coefficients(const std::vector<TrainingExample>& batch, LossReduction reduction) {
  std::vector<double> c(batch.size());
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) total += batch[i].weight;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (reduction == LossReduction::sum) {
      c[i] = batch[i].weight;
    } else {
      c[i] = total > 0.0 ? batch[i].weight / total : 0.0;
    }
  }
  return c;
}

double reduce(const std::vector<TrainingExample>& batch, const std::vector<double>& losses,
              LossReduction reduction) {
  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    weighted += batch[i].weight * losses[i];
    total += batch[i].weight;
  }
  if (reduction == LossReduction::sum) return weighted;
  return total > 0.0 ? weighted / total : 0.0;
}

}  // namespace

double weighted_loss(const std::vector<TrainingExample>& batch, const PairScorer& model,
                     const LossOptions& options) {
  check_batch(batch, options);
  std::vector<double> losses(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    losses[i] = binary_cross_entropy(model.score(batch[i].pair), batch[i].label);
  }
  return reduce(batch, losses, options.reduction);
}

double weighted_loss_backward(const std::vector<TrainingExample>& batch, PairScorer& model,
                              const LossOptions& options, bool training,
                              std::uint64_t dropout_seed) {
  check_batch(batch, options);
  const std::vector<double> coef = coefficients(batch, options.reduction);
  std::vector<double> losses(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Rng rng(derive_seed(dropout_seed, i));
    const double p = model.accumulate_gradient(batch[i].pair, batch[i].label, coef[i], training, rng);
    losses[i] = binary_cross_entropy(p, batch[i].label);
  }
  return reduce(batch, losses, options.reduction);
}

Evaluation evaluate_classifier(const PairScorer& model, const std::vector<TrainingExample>& examples) {
  Evaluation e;
  if (examples.empty()) return e;
  std::size_t correct = 0;
  for (const auto& ex : examples) {
    const double p = model.score(ex.pair);
    e.loss += binary_cross_entropy(p, ex.label);
    if ((p >= 0.5 ? 1 : 0) == ex.label) ++correct;
  }
  e.loss /= static_cast<double>(examples.size());
  e.accuracy = static_cast<double>(correct) / static_cast<double>(examples.size());
  return e;
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw DimensionError("roc_auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Mann-Whitney U with average ranks for ties.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        positive_rank_sum += avg_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) throw DataError("roc_auc needs both classes");
  const double np = static_cast<double>(positives);
  return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(negatives));
}

double roc_auc(const PairScorer& model, const std::vector<TrainingExample>& examples) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& ex : examples) {
    scores.push_back(model.score(ex.pair));
    labels.push_back(ex.label);
  }
  return roc_auc(scores, labels);
}

TrainingLog train_classifier(PairScorer& model, std::vector<TrainingExample> train,
                             const std::vector<TrainingExample>& validation,
                             const TrainerConfig& config, RmsProp* optimizer) {
  if (config.batch_size == 0) throw ConfigError("batch_size must be positive");
  RmsProp local(config.optimizer);
  RmsProp& opt = optimizer ? *optimizer : local;

  TrainingLog log;
  if (config.epochs == 0 || train.empty()) return log;

  const std::uint64_t shuffle_seed = derive_seed(config.seed, "shuffle");
  const std::uint64_t dropout_seed = derive_seed(config.seed, "dropout");
  const bool early_stopping = config.patience > 0 && !validation.empty();

  ParamSet best = model.params();
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::size_t seen = 0;
  std::size_t next_sample = config.curve_every;
  std::uint64_t step = 0;

  auto sample_curve = [&] {
    log.curve.push_back({seen, evaluate_classifier(model, validation).accuracy});
  };

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng shuffle(derive_seed(shuffle_seed, epoch));
    shuffle.shuffle(train);

    double loss_sum = 0.0;
    std::size_t batches = 0;
    std::vector<TrainingExample> batch;
    for (std::size_t start = 0; start < train.size(); start += config.batch_size) {
      const std::size_t end = std::min(train.size(), start + config.batch_size);
      batch.assign(train.begin() + static_cast<std::ptrdiff_t>(start),
                   train.begin() + static_cast<std::ptrdiff_t>(end));

      ParamSet& params = model.params();
      params.zero_grad();
      const double loss = weighted_loss_backward(batch, model, config.loss, true,
                                                 derive_seed(dropout_seed, step++));
      if (!std::isfinite(loss)) {
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + ", examples seen " +
                             std::to_string(seen) + "; parameters left at the last finite step");
      }
      ParamSet before = params;
      opt.step(params);
      if (!params.values_finite()) {
        params = std::move(before);
        throw NumericalError("non-finite parameter after update at epoch " + std::to_string(epoch) +
                             "; restored the previous values");
      }

      loss_sum += loss;
      ++batches;
      seen += batch.size();
      if (config.curve_every > 0 && !validation.empty()) {
        while (seen >= next_sample) {
          sample_curve();
          next_sample += config.curve_every;
        }
      }
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(batches);
    if (!validation.empty()) {
      const Evaluation v = evaluate_classifier(model, validation);
      stats.validation_loss = v.loss;
      stats.validation_accuracy = v.accuracy;
      if (config.curve_every == 0) log.curve.push_back({seen, v.accuracy});
    }
    log.epochs.push_back(stats);

    if (early_stopping) {
      if (stats.validation_loss < best_loss) {
        best_loss = stats.validation_loss;
        best = model.params();
        log.best_epoch = epoch;
        since_best = 0;
      } else if (++since_best >= config.patience) {
        log.stopped_early = true;
        break;
      }
    } else {
      log.best_epoch = epoch;
    }
  }

  if (early_stopping) {
    for (auto& [name, p] : model.params()) p.value = best.value(name);
  }
  return log;
}

}  // namespace dialweight
