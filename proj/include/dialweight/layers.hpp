#pragma once

// Fixed set of differentiable layers with hand-written backward passes.
//
// Every backward function ACCUMULATES into the gradient slots of the
// ParamSet it is given, so per-example gradients sum over a batch without
// extra buffers. Call ParamSet::zero_grad() before a new batch.

#include <span>
#include <string>
#include <vector>

#include "dialweight/params.hpp"
#include "dialweight/rng.hpp"
#include "dialweight/tensor.hpp"

namespace dialweight {

inline constexpr double kProbEpsilon = 1e-7;

enum class Activation { identity, sigmoid, tanh };

double sigmoid(double x);

// --- embedding -------------------------------------------------------------

// Row t of the result is row ids[t] of table. Throws IndexError naming the
// offending position.
Tensor embedding_forward(std::span<const int> ids, const Tensor& table);
void embedding_backward(std::span<const int> ids, const Tensor& d_out, Tensor& d_table);

// --- GRU -------------------------------------------------------------------
//
//   z_t  = sigmoid(W_z x_t + U_z h_{t-1} + b_z)
//   r_t  = sigmoid(W_r x_t + U_r h_{t-1} + b_r)
//   c_t  = tanh(W_h x_t + U_h (r_t * h_{t-1}) + b_h)
//   h_t  = (1 - z_t) * h_{t-1} + z_t * c_t
//
// The reset gate multiplies the previous state before U_h; b_h sits outside
// that product. Parameters live under "<prefix>.W_z", "<prefix>.U_z", ...

void add_gru_params(ParamSet& params, const std::string& prefix, std::size_t input_dim,
                    std::size_t hidden_dim, Rng& rng);

struct GruCache {
  Tensor inputs;       // T x D
  Tensor states;       // T x H, row t is h_t
  Tensor update;       // z, T x H
  Tensor reset;        // r, T x H
  Tensor candidate;    // c, T x H
  std::vector<double> h0;

  std::span<const double> final_state() const { return states.row(states.rows() - 1); }
};

// Throws DimensionError naming the first mis-shaped matrix.
GruCache gru_forward(const Tensor& inputs, const ParamSet& params, const std::string& prefix,
                     std::span<const double> h0);

struct GruInputGrads {
  Tensor d_inputs;            // T x D
  std::vector<double> d_h0;   // H
};

// d_states holds dLoss/dh_t for every step (gradient on the final state goes
// in the last row).
GruInputGrads gru_backward(const GruCache& cache, const Tensor& d_states, ParamSet& params,
                           const std::string& prefix);

// --- dense -----------------------------------------------------------------

// "<prefix>.W" is out x in (uniform init), "<prefix>.b" is out (zeros).
void add_dense_params(ParamSet& params, const std::string& prefix, std::size_t input_dim,
                      std::size_t output_dim, Rng& rng);

struct DenseCache {
  std::vector<double> input;
  std::vector<double> output;  // post-activation
  Activation activation = Activation::identity;
};

DenseCache dense_forward(std::span<const double> x, const ParamSet& params,
                         const std::string& prefix, Activation activation);
// Returns dLoss/dx.
std::vector<double> dense_backward(const DenseCache& cache, std::span<const double> d_output,
                                   ParamSet& params, const std::string& prefix);

// --- dropout ---------------------------------------------------------------

// Inverted dropout. In training mode each entry survives with probability
// 1 - rate and is scaled by 1/(1 - rate); otherwise the input is returned.
// The applied multipliers are written to *mask when given (all ones in
// inference mode) so the backward pass is d_x = d_y * mask.
Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng, Tensor* mask = nullptr);
std::vector<double> dropout(std::span<const double> x, double rate, bool training, Rng& rng,
                            std::vector<double>* mask = nullptr);

// --- loss ------------------------------------------------------------------

// -(y log p + (1-y) log(1-p)) with p clamped into [eps, 1-eps].
double binary_cross_entropy(double pred, double label);
// Derivative of the unclamped loss with respect to the pre-sigmoid logit.
inline double binary_cross_entropy_logit_grad(double pred, double label) { return pred - label; }

}  // namespace dialweight
