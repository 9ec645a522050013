#pragma once

#include <map>
#include <string>

#include "dialweight/params.hpp"
#include "dialweight/tensor.hpp"

namespace dialweight {

struct RmsPropConfig {
  double learning_rate = 0.001;
  double decay = 0.9;  // rho
  double epsilon = 1e-8;
};

// cache <- rho * cache + (1 - rho) * g^2
// param <- param - lr * g / (sqrt(cache) + eps)
class RmsProp {
 public:
  RmsProp() = default;
  explicit RmsProp(RmsPropConfig config) : config_(config) {}

  const RmsPropConfig& config() const { return config_; }

  // Applies one update using the gradients stored in params. Cache slots are
  // created lazily on the first step.
  void step(ParamSet& params);

  const std::map<std::string, Tensor>& caches() const { return caches_; }
  std::map<std::string, Tensor>& caches() { return caches_; }

 private:
  RmsPropConfig config_;
  std::map<std::string, Tensor> caches_;
};

}  // namespace dialweight
