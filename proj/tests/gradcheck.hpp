#pragma once

// Central finite-difference oracle shared by the unit and acceptance tests.
// It only perturbs parameter values and re-evaluates the scalar loss, so it
// is independent of every backward pass it is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "dialweight/params.hpp"

namespace dialweight::testing {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst;  // "name[index] analytic=... numeric=..."
  std::size_t checked = 0;
};

// |a - n| / max(|a|, |n|, floor). The floor keeps entries whose true
// gradient is numerically zero from dominating the ratio.
inline double relative_error(double analytic, double numeric, double floor = 1e-7) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

// `loss` evaluates the scalar objective from the current parameter values.
// `backward` must leave dLoss/dparam in the gradient slots (it is called
// once, after zero_grad()).
inline GradCheckResult check_gradients(ParamSet& params, const std::function<double()>& loss,
                                       const std::function<void()>& backward,
                                       double step = 1e-5, double floor = 1e-7) {
  params.zero_grad();
  backward();
  GradCheckResult result;
  for (auto& [name, p] : params) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + step;
      const double plus = loss();
      p.value[i] = saved - step;
      const double minus = loss();
      p.value[i] = saved;
      const double numeric = (plus - minus) / (2.0 * step);
      const double err = relative_error(p.grad[i], numeric, floor);
      ++result.checked;
      if (err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst = name + "[" + std::to_string(i) + "] analytic=" + std::to_string(p.grad[i]) +
                       " numeric=" + std::to_string(numeric);
      }
    }
  }
  return result;
}

}  // namespace dialweight::testing
