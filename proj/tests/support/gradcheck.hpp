#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "dfept/autodiff.hpp"

namespace dfept::testing {

/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-6).
inline double gradient_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

struct GradReport {
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_error = 0.0;
  double analytic = 0.0, numeric = 0.0;
  std::size_t checked = 0;
};

/// `loss` builds a fresh tape, binds the parameters and returns the scalar.
/// With `run_backward` it also calls backward so Parameter::grad is filled.
using LossFn = std::function<double(bool run_backward)>;

/// Central differences for every entry of every listed parameter.
inline GradReport check_gradients(const std::vector<Parameter<double>*>& params, const LossFn& loss,
                                  double eps = 1e-4) {
  for (auto* p : params) p->zero_grad();
  loss(true);
  GradReport r;
  for (auto* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      double& x = p->value.data()[i];
      const double keep = x;
      x = keep + eps;
      const double up = loss(false);
      x = keep - eps;
      const double down = loss(false);
      x = keep;
      const double numeric = (up - down) / (2 * eps);
      const double analytic = p->grad.data()[i];
      const double err = gradient_error(analytic, numeric);
      ++r.checked;
      if (err > r.worst_error || r.worst_param.empty()) {
        r.worst_error = err;
        r.worst_param = p->name;
        r.worst_index = i;
        r.analytic = analytic;
        r.numeric = numeric;
      }
    }
  }
  return r;
}

}  // namespace dfept::testing
