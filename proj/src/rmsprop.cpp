#include "dialweight/rmsprop.hpp"

#include <cmath>

#include "dialweight/error.hpp"

namespace dialweight {

void RmsProp::step(ParamSet& params) {
  const double rho = config_.decay;
  const double lr = config_.learning_rate;
  const double eps = config_.epsilon;
  for (auto& [name, p] : params) {
    auto it = caches_.find(name);
    if (it == caches_.end()) it = caches_.emplace(name, Tensor(p.value.shape())).first;
    Tensor& cache = it->second;
    if (!cache.same_shape(p.value) || !p.grad.same_shape(p.value)) {
      throw DimensionError("optimizer state for '" + name + "' has shape " +
                           cache.shape_string() + ", parameter has " + p.value.shape_string());
    }
    double* w = p.value.values().data();
    const double* g = p.grad.values().data();
    double* s = cache.values().data();
    const std::size_t n = p.value.size();
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = rho * s[i] + (1.0 - rho) * g[i] * g[i];
      w[i] -= lr * g[i] / (std::sqrt(s[i]) + eps);
    }
  }
}

}  // namespace dialweight
