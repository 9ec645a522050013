#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dialweight/params.hpp"
#include "dialweight/preprocess.hpp"
#include "dialweight/rmsprop.hpp"

namespace dialweight {

// A binary classifier over encoded <context, response> pairs. Both the
// weighting model and the Dual Encoder implement it.
class PairScorer {
 public:
  virtual ~PairScorer() = default;

  // Inference-mode probability (dropout off).
  virtual double score(const EncodedPair& pair) const = 0;

  // Forward pass followed by backpropagation of
  //   coefficient * BCE(label, sigmoid(logit))
  // into params() gradients. Returns the predicted probability. `rng`
  // drives dropout when `training` is set.
  virtual double accumulate_gradient(const EncodedPair& pair, double label, double coefficient,
                                     bool training, Rng& rng) = 0;

  virtual ParamSet& params() = 0;
  virtual const ParamSet& params() const = 0;
};

struct TrainingExample {
  EncodedPair pair;
  int label = 1;
  double weight = 1.0;
};

// Labeled examples from encoded pairs; a missing weight reads as 1.0.
std::vector<TrainingExample> to_training_examples(const std::vector<EncodedPair>& pairs);

enum class LossReduction {
  weighted_mean,  // sum_i w_i L_i / sum_i w_i
  sum,            // sum_i w_i L_i
};

struct LossOptions {
  LossReduction reduction = LossReduction::weighted_mean;
  // Test hook: lets weights of exactly zero through.
  bool allow_zero_weights = false;
};

// sum_i w_i * BCE(y_i, f(c_i, r_i)) under the chosen reduction, computed in
// inference mode. Throws DataError on an empty batch or a non-positive weight.
double weighted_loss(const std::vector<TrainingExample>& batch, const PairScorer& model,
                     const LossOptions& options = {});

// Same loss; also accumulates its gradient into model.params(). Example i
// uses a dropout stream seeded from derive_seed(dropout_seed, i).
double weighted_loss_backward(const std::vector<TrainingExample>& batch, PairScorer& model,
                              const LossOptions& options, bool training,
                              std::uint64_t dropout_seed);

struct TrainerConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 64;
  RmsPropConfig optimizer;
  LossOptions loss;
  // Learning-curve sample every this many examples seen (0: once per epoch).
  std::size_t curve_every = 0;
  // Early stopping on validation loss; 0 disables it. The best epoch's
  // parameters are restored at the end.
  std::size_t patience = 0;
  std::uint64_t seed = 0;
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double validation_accuracy = 0.0;
};

struct CurvePoint {
  std::size_t examples_seen = 0;
  double validation_accuracy = 0.0;
};

struct TrainingLog {
  std::vector<EpochStats> epochs;
  std::vector<CurvePoint> curve;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
};

// Accuracy at the 0.5 threshold and mean unweighted BCE.
struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};
Evaluation evaluate_classifier(const PairScorer& model, const std::vector<TrainingExample>& examples);

// Area under the ROC curve of model scores (ties count one half).
double roc_auc(const PairScorer& model, const std::vector<TrainingExample>& examples);
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Mini-batch RMSProp training with per-epoch shuffling. Throws
// NumericalError on a non-finite loss or parameter, after restoring the
// parameters from before the failing step.
TrainingLog train_classifier(PairScorer& model, std::vector<TrainingExample> train,
                             const std::vector<TrainingExample>& validation,
                             const TrainerConfig& config, RmsProp* optimizer = nullptr);

}  // namespace dialweight
