#include "dialweight/layers.hpp"

#include <algorithm>
#include <cmath>

#include "dialweight/error.hpp"

namespace dialweight {

double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

double activate(Activation a, double x) {
  switch (a) {
    case Activation::sigmoid:
      return sigmoid(x);
    case Activation::tanh:
      return std::tanh(x);
    case Activation::identity:
      break;
  }
  return x;
}

// Derivative expressed through the activation output y.
double activation_slope(Activation a, double y) {
  switch (a) {
    case Activation::sigmoid:
      return y * (1.0 - y);
    case Activation::tanh:
      return 1.0 - y * y;
    case Activation::identity:
      break;
  }
  return 1.0;
}

void expect_shape(const Tensor& t, std::vector<std::size_t> shape, const std::string& name) {
  if (t.shape() != shape) {
    throw DimensionError("parameter '" + name + "' has shape " + t.shape_string() +
                         ", expected " + Tensor(shape).shape_string());
  }
}

struct GruRefs {
  const Tensor* w[3];  // z, r, h
  const Tensor* u[3];
  const Tensor* b[3];
};

constexpr const char* kGate[3] = {"z", "r", "h"};

GruRefs gru_refs(const ParamSet& params, const std::string& prefix, std::size_t input_dim,
                 std::size_t hidden_dim) {
  GruRefs refs{};
  for (int g = 0; g < 3; ++g) {
    const std::string w = prefix + ".W_" + kGate[g];
    const std::string u = prefix + ".U_" + kGate[g];
    const std::string b = prefix + ".b_" + kGate[g];
    refs.w[g] = &params.value(w);
    refs.u[g] = &params.value(u);
    refs.b[g] = &params.value(b);
    expect_shape(*refs.w[g], {hidden_dim, input_dim}, w);
    expect_shape(*refs.u[g], {hidden_dim, hidden_dim}, u);
    expect_shape(*refs.b[g], {hidden_dim}, b);
  }
  return refs;
}

}  // namespace

Tensor embedding_forward(std::span<const int> ids, const Tensor& table) {
  if (table.rank() != 2) throw DimensionError("embedding table must be a matrix");
  const std::size_t vocab = table.rows();
  const std::size_t dim = table.cols();
  Tensor out = Tensor::matrix(ids.size(), dim);
  for (std::size_t t = 0; t < ids.size(); ++t) {
    const int id = ids[t];
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      throw IndexError("embedding id " + std::to_string(id) + " at position " +
                       std::to_string(t) + " is outside [0, " + std::to_string(vocab) + ")");
    }
    std::copy_n(table.row(static_cast<std::size_t>(id)).begin(), dim, out.row(t).begin());
  }
  return out;
}

void embedding_backward(std::span<const int> ids, const Tensor& d_out, Tensor& d_table) {
  const std::size_t dim = d_table.cols();
  for (std::size_t t = 0; t < ids.size(); ++t) {
    auto dst = d_table.row(static_cast<std::size_t>(ids[t]));
    auto src = d_out.row(t);
    for (std::size_t k = 0; k < dim; ++k) dst[k] += src[k];
  }
}

void add_gru_params(ParamSet& params, const std::string& prefix, std::size_t input_dim,
                    std::size_t hidden_dim, Rng& rng) {
  for (const char* g : kGate) {
    params.add_uniform(prefix + ".W_" + g, {hidden_dim, input_dim}, rng);
    params.add_uniform(prefix + ".U_" + g, {hidden_dim, hidden_dim}, rng);
    params.add_zeros(prefix + ".b_" + g, {hidden_dim});
  }
}

GruCache gru_forward(const Tensor& inputs, const ParamSet& params, const std::string& prefix,
                     std::span<const double> h0) {
  const std::size_t steps = inputs.rows();
  const std::size_t input_dim = inputs.cols();
  const std::size_t hidden = h0.size();
  if (steps == 0) throw DimensionError("GRU '" + prefix + "' needs at least one input step");
  const GruRefs p = gru_refs(params, prefix, input_dim, hidden);

  GruCache c;
  c.inputs = inputs;
  c.states = Tensor::matrix(steps, hidden);
  c.update = Tensor::matrix(steps, hidden);
  c.reset = Tensor::matrix(steps, hidden);
  c.candidate = Tensor::matrix(steps, hidden);
  c.h0.assign(h0.begin(), h0.end());

  std::vector<double> a(hidden), rh(hidden);
  std::span<const double> prev = c.h0;
  for (std::size_t t = 0; t < steps; ++t) {
    auto x = inputs.row(t);
    auto z = c.update.row(t);
    auto r = c.reset.row(t);
    auto cand = c.candidate.row(t);

    for (int g = 0; g < 2; ++g) {
      auto b = p.b[g]->values();
      std::copy(b.begin(), b.end(), a.begin());
      matvec_add(*p.w[g], x, a);
      matvec_add(*p.u[g], prev, a);
      auto gate = g == 0 ? z : r;
      for (std::size_t k = 0; k < hidden; ++k) gate[k] = sigmoid(a[k]);
    }
    for (std::size_t k = 0; k < hidden; ++k) rh[k] = r[k] * prev[k];
    auto bh = p.b[2]->values();
    std::copy(bh.begin(), bh.end(), a.begin());
    matvec_add(*p.w[2], x, a);
    matvec_add(*p.u[2], rh, a);
    for (std::size_t k = 0; k < hidden; ++k) cand[k] = std::tanh(a[k]);

    auto h = c.states.row(t);
    for (std::size_t k = 0; k < hidden; ++k) h[k] = (1.0 - z[k]) * prev[k] + z[k] * cand[k];
    prev = c.states.row(t);
  }
  return c;
}

GruInputGrads gru_backward(const GruCache& c, const Tensor& d_states, ParamSet& params,
                           const std::string& prefix) {
  const std::size_t steps = c.states.rows();
  const std::size_t hidden = c.states.cols();
  const std::size_t input_dim = c.inputs.cols();
  if (!d_states.same_shape(c.states)) {
    throw DimensionError("GRU '" + prefix + "' state gradient has shape " +
                         d_states.shape_string() + ", expected " + c.states.shape_string());
  }
  const GruRefs p = gru_refs(params, prefix, input_dim, hidden);
  Tensor* gw[3];
  Tensor* gu[3];
  Tensor* gb[3];
  for (int g = 0; g < 3; ++g) {
    gw[g] = &params.at(prefix + ".W_" + kGate[g]).grad;
    gu[g] = &params.at(prefix + ".U_" + kGate[g]).grad;
    gb[g] = &params.at(prefix + ".b_" + kGate[g]).grad;
  }

  GruInputGrads out{Tensor::matrix(steps, input_dim), std::vector<double>(hidden, 0.0)};
  std::vector<double> dh(hidden, 0.0), dh_prev(hidden), rh(hidden), d_rh(hidden);
  std::vector<double> da_z(hidden), da_r(hidden), da_h(hidden);

  for (std::size_t step = steps; step-- > 0;) {
    std::span<const double> prev = step == 0 ? std::span<const double>(c.h0) : c.states.row(step - 1);
    auto x = c.inputs.row(step);
    auto z = c.update.row(step);
    auto r = c.reset.row(step);
    auto cand = c.candidate.row(step);
    auto dx = out.d_inputs.row(step);
    auto ds = d_states.row(step);

    for (std::size_t k = 0; k < hidden; ++k) {
      dh[k] += ds[k];
      dh_prev[k] = dh[k] * (1.0 - z[k]);
      da_z[k] = dh[k] * (cand[k] - prev[k]) * z[k] * (1.0 - z[k]);
      da_h[k] = dh[k] * z[k] * (1.0 - cand[k] * cand[k]);
      rh[k] = r[k] * prev[k];
      d_rh[k] = 0.0;
    }

    // candidate path
    outer_add(da_h, x, *gw[2]);
    outer_add(da_h, rh, *gu[2]);
    for (std::size_t k = 0; k < hidden; ++k) (*gb[2])[k] += da_h[k];
    matvec_t_add(*p.w[2], da_h, dx);
    matvec_t_add(*p.u[2], da_h, d_rh);
    for (std::size_t k = 0; k < hidden; ++k) {
      dh_prev[k] += d_rh[k] * r[k];
      da_r[k] = d_rh[k] * prev[k] * r[k] * (1.0 - r[k]);
    }

    // update and reset gates
    const double* da[2] = {da_z.data(), da_r.data()};
    for (int g = 0; g < 2; ++g) {
      std::span<const double> d(da[g], hidden);
      outer_add(d, x, *gw[g]);
      outer_add(d, prev, *gu[g]);
      for (std::size_t k = 0; k < hidden; ++k) (*gb[g])[k] += d[k];
      matvec_t_add(*p.w[g], d, dx);
      matvec_t_add(*p.u[g], d, dh_prev);
    }
    dh.swap(dh_prev);
  }
  out.d_h0 = dh;
  return out;
}

void add_dense_params(ParamSet& params, const std::string& prefix, std::size_t input_dim,
                      std::size_t output_dim, Rng& rng) {
  params.add_uniform(prefix + ".W", {output_dim, input_dim}, rng);
  params.add_zeros(prefix + ".b", {output_dim});
}

DenseCache dense_forward(std::span<const double> x, const ParamSet& params,
                         const std::string& prefix, Activation activation) {
  const Tensor& w = params.value(prefix + ".W");
  const Tensor& b = params.value(prefix + ".b");
  if (w.rank() != 2 || w.cols() != x.size()) {
    throw DimensionError("parameter '" + prefix + ".W' has shape " + w.shape_string() +
                         " but the input has " + std::to_string(x.size()) + " entries");
  }
  if (b.rank() != 1 || b.size() != w.rows()) {
    throw DimensionError("parameter '" + prefix + ".b' has shape " + b.shape_string() +
                         ", expected [" + std::to_string(w.rows()) + "]");
  }
  DenseCache c;
  c.input.assign(x.begin(), x.end());
  c.activation = activation;
  c.output.assign(b.values().begin(), b.values().end());
  matvec_add(w, x, c.output);
  for (double& v : c.output) v = activate(activation, v);
  return c;
}

std::vector<double> dense_backward(const DenseCache& c, std::span<const double> d_output,
                                   ParamSet& params, const std::string& prefix) {
  Parameter& w = params.at(prefix + ".W");
  Parameter& b = params.at(prefix + ".b");
  std::vector<double> d_pre(c.output.size());
  for (std::size_t k = 0; k < d_pre.size(); ++k) {
    d_pre[k] = d_output[k] * activation_slope(c.activation, c.output[k]);
    b.grad[k] += d_pre[k];
  }
  outer_add(d_pre, c.input, w.grad);
  std::vector<double> dx(c.input.size(), 0.0);
  matvec_t_add(w.value, d_pre, dx);
  return dx;
}

std::vector<double> dropout(std::span<const double> x, double rate, bool training, Rng& rng,
                            std::vector<double>* mask) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout rate must be in [0, 1), got " + std::to_string(rate));
  }
  std::vector<double> out(x.begin(), x.end());
  if (mask) mask->assign(x.size(), 1.0);
  if (!training || rate == 0.0) return out;
  const double scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double m = rng.uniform() < rate ? 0.0 : scale;
    out[i] *= m;
    if (mask) (*mask)[i] = m;
  }
  return out;
}

Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng, Tensor* mask) {
  std::vector<double> m;
  std::vector<double> out = dropout(x.values(), rate, training, rng, mask ? &m : nullptr);
  if (mask) *mask = Tensor(x.shape(), std::move(m));
  return Tensor(x.shape(), std::move(out));
}

double binary_cross_entropy(double pred, double label) {
  const double p = std::clamp(pred, kProbEpsilon, 1.0 - kProbEpsilon);
  return -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
}

}  // namespace dialweight
