#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "edagcn/model.hpp"

namespace edagcn {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_parameter;  // "<tensor>[<flat index>]"
  std::string worst_tensor;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  bool pass = false;
};

using Objective = std::function<double(const ParameterSet&)>;

/// Central differences on every entry of every tensor, compared with
/// `analytic` via |a - f| / max(|a|, |f|, 1e-8). Entries where both values
/// are below 1e-10 in magnitude are skipped.
GradCheckReport grad_check(const ParameterSet& params, const ParameterSet& analytic,
                           const Objective& objective, double step, double tolerance);

}  // namespace edagcn
