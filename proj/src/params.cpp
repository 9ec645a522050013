#include "dialweight/params.hpp"

#include <cmath>

#include "dialweight/error.hpp"

namespace dialweight {

Parameter& ParamSet::add(const std::string& name, Tensor init) {
  if (params_.count(name)) throw ConfigError("duplicate parameter name '" + name + "'");
  Tensor grad(init.shape());
  auto [it, inserted] = params_.emplace(name, Parameter{std::move(init), std::move(grad)});
  return it->second;
}

Parameter& ParamSet::add_uniform(const std::string& name, std::vector<std::size_t> shape,
                                 Rng& rng) {
  Tensor t(std::move(shape));
  const double fan_in = static_cast<double>(t.rank() >= 2 ? t.cols() : t.size());
  const double bound = 1.0 / std::sqrt(fan_in);
  for (double& v : t.values()) v = rng.uniform(-bound, bound);
  return add(name, std::move(t));
}

Parameter& ParamSet::add_zeros(const std::string& name, std::vector<std::size_t> shape) {
  return add(name, Tensor(std::move(shape)));
}

Parameter& ParamSet::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second;
}

const Parameter& ParamSet::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second;
}

void ParamSet::zero_grad() {
  for (auto& [name, p] : params_) p.grad.fill(0.0);
}

void ParamSet::fill_values(double v) {
  for (auto& [name, p] : params_) p.value.fill(v);
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, p] : params_) n += p.value.size();
  return n;
}

bool ParamSet::values_finite() const {
  for (const auto& [name, p] : params_) {
    if (!p.value.all_finite()) return false;
  }
  return true;
}

bool ParamSet::same_values(const ParamSet& other) const {
  if (params_.size() != other.params_.size()) return false;
  auto a = params_.begin();
  auto b = other.params_.begin();
  for (; a != params_.end(); ++a, ++b) {
    if (a->first != b->first || !(a->second.value == b->second.value)) return false;
  }
  return true;
}

void ParamSet::assign_values(const ParamSet& other) {
  if (params_.size() != other.params_.size()) {
    throw DimensionError("parameter count " + std::to_string(other.params_.size()) + ", expected " +
                         std::to_string(params_.size()));
  }
  for (auto& [name, p] : params_) {
    auto it = other.params_.find(name);
    if (it == other.params_.end()) throw DimensionError("missing parameter '" + name + "'");
    if (!it->second.value.same_shape(p.value)) {
      throw DimensionError("parameter '" + name + "' has shape " + it->second.value.shape_string() +
                           ", expected " + p.value.shape_string());
    }
    p.value = it->second.value;
  }
}

}  // namespace dialweight
