#include "dialweight/dual_encoder.hpp"

#include "dialweight/error.hpp"
#include "dialweight/layers.hpp"

namespace dialweight {

namespace {

constexpr const char* kKind = "dual_encoder";

}  // namespace

nlohmann::json to_json(const DualEncoderConfig& c) {
  return {{"vocab_size", c.vocab_size},
          {"embedding_dim", c.encoder.embedding_dim},
          {"hidden_dim", c.encoder.hidden_dim},
          {"bidirectional", c.encoder.bidirectional},
          {"projection_dim", c.projection_dim},
          {"dropout", c.dropout}};
}

DualEncoderConfig dual_encoder_config_from_json(const nlohmann::json& j) {
  try {
    DualEncoderConfig c;
    c.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.encoder.embedding_dim = j.at("embedding_dim").get<std::size_t>();
    c.encoder.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    c.encoder.bidirectional = j.at("bidirectional").get<bool>();
    c.projection_dim = j.at("projection_dim").get<std::size_t>();
    c.dropout = j.at("dropout").get<double>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("dual encoder architecture: ") + e.what());
  }
}

struct DualEncoder::Forward {
  SequenceEncoder::Cache context;
  SequenceEncoder::Cache response;
  DenseCache context_dense;
  DenseCache response_dense;
  std::vector<double> context_mask;
  std::vector<double> response_mask;
  std::vector<double> c;  // c' after dropout
  std::vector<double> r;  // r' after dropout
  DenseCache final;
};

DualEncoder::DualEncoder(const DualEncoderConfig& config, std::uint64_t init_seed)
    : config_(config),
      context_encoder_("embedding", "context_encoder", config.encoder),
      response_encoder_("embedding", "response_encoder", config.encoder) {
  if (config.vocab_size == 0) throw ConfigError("dual encoder vocab_size must be positive");
  if (config.encoder.embedding_dim == 0 || config.encoder.hidden_dim == 0 || config.projection_dim == 0) {
    throw ConfigError("dual encoder dimensions must be positive");
  }
  Rng rng(init_seed);
  params_.add_uniform("embedding", {config.vocab_size, config.encoder.embedding_dim}, rng);
  context_encoder_.add_params(params_, rng);
  response_encoder_.add_params(params_, rng);
  add_dense_params(params_, "context_dense", config.encoder.output_dim(), config.projection_dim, rng);
  add_dense_params(params_, "response_dense", config.encoder.output_dim(), config.projection_dim, rng);
  add_dense_params(params_, "final", 1 + config.projection_dim, 1, rng);
}

double DualEncoder::run(std::span<const int> context_ids, std::span<const int> response_ids, bool training,
                        Rng& rng, Forward* cache) const {
  const double rate = config_.dropout;
  const std::vector<double> ce =
      context_encoder_.encode(context_ids, params_, rate, training, rng, cache ? &cache->context : nullptr);
  const std::vector<double> re =
      response_encoder_.encode(response_ids, params_, rate, training, rng, cache ? &cache->response : nullptr);

  DenseCache cd = dense_forward(ce, params_, "context_dense", Activation::tanh);
  DenseCache rd = dense_forward(re, params_, "response_dense", Activation::tanh);
  std::vector<double> c_mask;
  std::vector<double> r_mask;
  std::vector<double> c = dropout(cd.output, rate, training, rng, cache ? &c_mask : nullptr);
  std::vector<double> r = dropout(rd.output, rate, training, rng, cache ? &r_mask : nullptr);

  std::vector<double> joint(1 + r.size());
  for (std::size_t k = 0; k < c.size(); ++k) joint[0] += c[k] * r[k];
  std::copy(r.begin(), r.end(), joint.begin() + 1);
  DenseCache fin = dense_forward(joint, params_, "final", Activation::identity);
  const double z = fin.output[0];

  if (cache) {
    cache->context_dense = std::move(cd);
    cache->response_dense = std::move(rd);
    cache->context_mask = std::move(c_mask);
    cache->response_mask = std::move(r_mask);
    cache->c = std::move(c);
    cache->r = std::move(r);
    cache->final = std::move(fin);
  }
  return z;
}

double DualEncoder::score(std::span<const int> context_ids, std::span<const int> response_ids) const {
  return sigmoid(logit(context_ids, response_ids));
}

double DualEncoder::logit(std::span<const int> context_ids, std::span<const int> response_ids) const {
  Rng unused(0);
  return run(context_ids, response_ids, false, unused, nullptr);
}

double DualEncoder::score(const EncodedPair& pair) const { return score(pair.context_ids, pair.response_ids); }

double DualEncoder::accumulate_gradient(const EncodedPair& pair, double label, double coefficient,
                                        bool training, Rng& rng) {
  Forward f;
  const double p = sigmoid(run(pair.context_ids, pair.response_ids, training, rng, &f));
  const double d_logit = coefficient * binary_cross_entropy_logit_grad(p, label);

  const std::vector<double> d_joint = dense_backward(f.final, std::span(&d_logit, 1), params_, "final");
  const std::size_t n = f.c.size();
  std::vector<double> d_c(n);
  std::vector<double> d_r(n);
  for (std::size_t k = 0; k < n; ++k) {
    d_c[k] = d_joint[0] * f.r[k] * f.context_mask[k];
    d_r[k] = (d_joint[0] * f.c[k] + d_joint[1 + k]) * f.response_mask[k];
  }
  const std::vector<double> d_ce = dense_backward(f.context_dense, d_c, params_, "context_dense");
  const std::vector<double> d_re = dense_backward(f.response_dense, d_r, params_, "response_dense");
  context_encoder_.backward(f.context, d_ce, params_);
  response_encoder_.backward(f.response, d_re, params_);
  return p;
}

Checkpoint DualEncoder::to_checkpoint(std::uint64_t vocab_fingerprint, const RmsProp* optimizer) const {
  Checkpoint ckpt;
  ckpt.vocab_fingerprint = vocab_fingerprint;
  ckpt.metadata = {{"kind", kKind}, {"architecture", to_json(config_)}};
  ckpt.params = params_;
  ckpt.params.zero_grad();
  if (optimizer) ckpt.optimizer_state = optimizer->caches();
  return ckpt;
}

DualEncoder DualEncoder::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.metadata.value("kind", "") != kKind) {
    throw ConfigError("checkpoint holds a '" + ckpt.metadata.value("kind", "") + "' model, not a dual encoder");
  }
  DualEncoder model(dual_encoder_config_from_json(ckpt.metadata.at("architecture")), 0);
  model.params_.assign_values(ckpt.params);
  return model;
}

double dual_encoder_score(const DualEncoder& model, std::span<const int> context_ids,
                          std::span<const int> response_ids) {
  return model.score(context_ids, response_ids);
}

DualEncoderTrainingResult train_dual_encoder(const std::vector<TrainingExample>& train,
                                             const std::vector<TrainingExample>& validation,
                                             const DualEncoderConfig& model_config,
                                             const TrainerConfig& trainer, std::uint64_t seed,
                                             const Tensor* initial_embeddings) {
  DualEncoder model(model_config, derive_seed(seed, "init"));
  if (initial_embeddings) {
    Tensor& table = model.params().at("embedding").value;
    if (!initial_embeddings->same_shape(table)) {
      throw DimensionError("initial embeddings " + initial_embeddings->shape_string() + ", expected " +
                           table.shape_string());
    }
    table = *initial_embeddings;
  }
  TrainerConfig tc = trainer;
  tc.seed = derive_seed(seed, "train");
  RmsProp optimizer(tc.optimizer);
  TrainingLog log = train_classifier(model, train, validation, tc, &optimizer);
  return {std::move(model), std::move(log), std::move(optimizer)};
}

}  // namespace dialweight
