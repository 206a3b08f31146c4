#include "edagcn/optimizer.hpp"

#include <cmath>
#include <string>

#include "edagcn/error.hpp"

namespace edagcn {
namespace {

std::vector<Tensor*> tensors_of(ParameterSet& p) {
  std::vector<Tensor*> out;
  p.for_each([&](const std::string&, Tensor& t) { out.push_back(&t); });
  return out;
}

std::vector<const Tensor*> tensors_of(const ParameterSet& p) {
  std::vector<const Tensor*> out;
  p.for_each([&](const std::string&, const Tensor& t) { out.push_back(&t); });
  return out;
}

}  // namespace

OptimizerState OptimizerState::for_params(const ParameterSet& params) {
  OptimizerState s;
  s.first_moment = params;
  s.first_moment.for_each([](const std::string&, Tensor& t) { std::fill(t.data.begin(), t.data.end(), 0.0); });
  s.second_moment = s.first_moment;
  return s;
}

void adam_step(ParameterSet& params, const ParameterSet& grads, OptimizerState& state, double lr) {
  auto p = tensors_of(params);
  auto g = tensors_of(grads);
  auto m = tensors_of(state.first_moment);
  auto v = tensors_of(state.second_moment);
  if (p.size() != g.size() || p.size() != m.size() || p.size() != v.size())
    throw ShapeError("optimizer state does not match parameters");
  for (std::size_t t = 0; t < p.size(); ++t)
    if (p[t]->shape != g[t]->shape || p[t]->shape != m[t]->shape || p[t]->shape != v[t]->shape)
      throw ShapeError("gradient tensor shape does not match parameter");

  ++state.step_count;
  const double step = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, step);
  const double c2 = 1.0 - std::pow(state.beta2, step);
  for (std::size_t t = 0; t < p.size(); ++t) {
    auto& pd = p[t]->data;
    const auto& gd = g[t]->data;
    auto& md = m[t]->data;
    auto& vd = v[t]->data;
    for (std::size_t j = 0; j < pd.size(); ++j) {
      md[j] = state.beta1 * md[j] + (1.0 - state.beta1) * gd[j];
      vd[j] = state.beta2 * vd[j] + (1.0 - state.beta2) * gd[j] * gd[j];
      pd[j] -= lr * (md[j] / c1) / (std::sqrt(vd[j] / c2) + state.eps);
    }
  }
}

}  // namespace edagcn
