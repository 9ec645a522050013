#pragma once

#include <cstddef>
#include <map>
#include <string>

#include "dialweight/rng.hpp"
#include "dialweight/tensor.hpp"

namespace dialweight {

struct Parameter {
  Tensor value;
  Tensor grad;  // same shape as value
};

// Named trainable tensors of one model. Iteration is in name order, which
// fixes the checkpoint layout and the optimizer's visiting order.
class ParamSet {
 public:
  using Map = std::map<std::string, Parameter>;

  // Throws ConfigError if the name is taken.
  Parameter& add(const std::string& name, Tensor init);

  // Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], fan_in = trailing extent.
  Parameter& add_uniform(const std::string& name, std::vector<std::size_t> shape, Rng& rng);
  Parameter& add_zeros(const std::string& name, std::vector<std::size_t> shape);

  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  const Tensor& value(const std::string& name) const { return at(name).value; }
  bool contains(const std::string& name) const { return params_.count(name) != 0; }

  void zero_grad();
  void fill_values(double v);
  std::size_t scalar_count() const;
  bool values_finite() const;

  Map::iterator begin() { return params_.begin(); }
  Map::iterator end() { return params_.end(); }
  Map::const_iterator begin() const { return params_.begin(); }
  Map::const_iterator end() const { return params_.end(); }
  std::size_t size() const { return params_.size(); }

  // Values only; gradients are ignored.
  bool same_values(const ParamSet& other) const;

  // Copies values from `other`, which must hold exactly the same names and
  // shapes (DimensionError otherwise).
  void assign_values(const ParamSet& other);

 private:
  Map params_;
};

}  // namespace dialweight
