#include "edagcn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "edagcn/error.hpp"

namespace edagcn {

GradCheckReport grad_check(const ParameterSet& params, const ParameterSet& analytic, const Objective& objective,
                           double step, double tolerance) {
  std::vector<std::pair<std::string, const Tensor*>> grads;
  analytic.for_each([&](const std::string& name, const Tensor& t) { grads.emplace_back(name, &t); });

  ParameterSet probe = params;
  std::vector<std::pair<std::string, Tensor*>> slots;
  probe.for_each([&](const std::string& name, Tensor& t) { slots.emplace_back(name, &t); });
  if (slots.size() != grads.size()) throw ShapeError("gradient set does not match parameters");

  GradCheckReport report;
  for (std::size_t t = 0; t < slots.size(); ++t) {
    Tensor& slot = *slots[t].second;
    if (slot.shape != grads[t].second->shape) throw ShapeError("gradient shape mismatch in " + slots[t].first);
    for (std::size_t j = 0; j < slot.size(); ++j) {
      const double saved = slot[j];
      slot[j] = saved + step;
      const double up = objective(probe);
      slot[j] = saved - step;
      const double down = objective(probe);
      slot[j] = saved;

      const double numeric = (up - down) / (2.0 * step);
      const double a = (*grads[t].second)[j];
      if (std::abs(a) < 1e-10 && std::abs(numeric) < 1e-10) continue;
      ++report.checked;
      double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      if (!std::isfinite(rel)) rel = std::numeric_limits<double>::infinity();
      if (rel > report.max_rel_error || report.worst_parameter.empty()) {
        report.max_rel_error = rel;
        report.worst_tensor = slots[t].first;
        report.worst_parameter = slots[t].first + "[" + std::to_string(j) + "]";
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  report.pass = report.max_rel_error < tolerance;
  return report;
}

}  // namespace edagcn
