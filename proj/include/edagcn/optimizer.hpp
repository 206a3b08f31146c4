#pragma once

#include <cstddef>

#include "edagcn/model.hpp"

namespace edagcn {

struct OptimizerState {
  ParameterSet first_moment;
  ParameterSet second_moment;
  std::size_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  /// Zero moments shaped like params.
  static OptimizerState for_params(const ParameterSet& params);
};

/// One bias-corrected Adam update in place.
void adam_step(ParameterSet& params, const ParameterSet& grads, OptimizerState& state, double lr);

}  // namespace edagcn
