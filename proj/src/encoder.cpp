#include "dialweight/encoder.hpp"

#include <algorithm>
#include <istream>
#include <sstream>

#include "dialweight/error.hpp"
#include "dialweight/preprocess.hpp"

namespace dialweight {

namespace {

Tensor reversed_rows(const Tensor& t) {
  Tensor out(t.shape());
  const std::size_t n = t.rows();
  for (std::size_t i = 0; i < n; ++i) {
    auto src = t.row(n - 1 - i);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace

void SequenceEncoder::add_params(ParamSet& params, Rng& rng) const {
  add_gru_params(params, gru_, shape_.embedding_dim, shape_.hidden_dim, rng);
  if (shape_.bidirectional) {
    add_gru_params(params, gru_ + "_bwd", shape_.embedding_dim, shape_.hidden_dim, rng);
  }
}

std::vector<double> SequenceEncoder::encode(std::span<const int> ids, const ParamSet& params,
                                            double dropout_rate, bool training, Rng& rng,
                                            Cache* cache) const {
  static const int kPadOnly[1] = {Vocabulary::kPad};
  if (ids.empty()) ids = kPadOnly;

  Tensor mask;
  Tensor embedded = embedding_forward(ids, params.value(embedding_));
  Tensor inputs = dropout(embedded, dropout_rate, training, rng, cache ? &mask : nullptr);

  const std::vector<double> h0(shape_.hidden_dim, 0.0);
  GruCache fwd = gru_forward(inputs, params, gru_, h0);
  std::vector<double> out(fwd.final_state().begin(), fwd.final_state().end());
  std::optional<GruCache> bwd;
  if (shape_.bidirectional) {
    bwd = gru_forward(reversed_rows(inputs), params, gru_ + "_bwd", h0);
    out.insert(out.end(), bwd->final_state().begin(), bwd->final_state().end());
  }

  std::vector<double> out_mask;
  out = dropout(out, dropout_rate, training, rng, cache ? &out_mask : nullptr);
  if (cache) {
    cache->ids.assign(ids.begin(), ids.end());
    cache->input_mask = std::move(mask);
    cache->forward = std::move(fwd);
    cache->backward = std::move(bwd);
    cache->output_mask = std::move(out_mask);
  }
  return out;
}

void SequenceEncoder::backward(const Cache& cache, std::span<const double> d_output,
                               ParamSet& params) const {
  const std::size_t hidden = shape_.hidden_dim;
  const std::size_t steps = cache.forward.states.rows();

  Tensor d_states = Tensor::matrix(steps, hidden);
  for (std::size_t k = 0; k < hidden; ++k) d_states(steps - 1, k) = d_output[k] * cache.output_mask[k];
  GruInputGrads g = gru_backward(cache.forward, d_states, params, gru_);
  Tensor d_inputs = std::move(g.d_inputs);

  if (cache.backward) {
    Tensor d_rev = Tensor::matrix(steps, hidden);
    for (std::size_t k = 0; k < hidden; ++k) {
      d_rev(steps - 1, k) = d_output[hidden + k] * cache.output_mask[hidden + k];
    }
    GruInputGrads gb = gru_backward(*cache.backward, d_rev, params, gru_ + "_bwd");
    for (std::size_t t = 0; t < steps; ++t) {
      auto dst = d_inputs.row(t);
      auto src = gb.d_inputs.row(steps - 1 - t);
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }

  for (std::size_t i = 0; i < d_inputs.size(); ++i) d_inputs[i] *= cache.input_mask[i];
  embedding_backward(cache.ids, d_inputs, params.at(embedding_).grad);
}

std::size_t load_pretrained_embeddings(std::istream& in, const Vocabulary& vocab, Tensor& table) {
  if (table.rank() != 2 || table.rows() != vocab.size()) {
    throw DimensionError("embedding table " + table.shape_string() + " does not match vocabulary of " +
                         std::to_string(vocab.size()));
  }
  std::size_t replaced = 0;
  std::size_t line_no = 0;
  std::string line;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    values.clear();
    for (double v; fields >> v;) values.push_back(v);
    if (!fields.eof()) throw ParseError(line_no, "non-numeric embedding value");
    if (!vocab.contains(token)) continue;
    if (values.size() != table.cols()) {
      throw ParseError(line_no, "embedding for '" + token + "' has " + std::to_string(values.size()) +
                                    " values, expected " + std::to_string(table.cols()));
    }
    std::copy(values.begin(), values.end(), table.row(static_cast<std::size_t>(vocab.id(token))).begin());
    ++replaced;
  }
  return replaced;
}

}  // namespace dialweight
