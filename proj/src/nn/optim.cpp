#include "polynet/nn/optim.hpp"

#include "polynet/error.hpp"

#include <algorithm>
#include <cmath>

namespace polynet::nn {

void adam_step(std::span<Parameter* const> params, AdamState& state, double lr) {
  if (state.m.empty()) {
    for (const Parameter* p : params) {
      state.m.emplace_back(p->value.rows(), p->value.cols());
      state.v.emplace_back(p->value.rows(), p->value.cols());
    }
  }
  if (state.m.size() != params.size()) throw Error(ErrorCode::Dimension, "Adam state does not match parameter list");
  ++state.step;
  const double correct1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double correct2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t n = 0; n < params.size(); ++n) {
    Parameter& p = *params[n];
    if (!p.grad.same_shape(p.value) || !state.m[n].same_shape(p.value))
      throw Error(ErrorCode::Dimension, "Adam shape mismatch for " + p.name);
    auto& value = p.value.values();
    const auto& grad = p.grad.values();
    auto& m = state.m[n].values();
    auto& v = state.v[n].values();
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * grad[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
      const double m_hat = m[i] / correct1;
      const double v_hat = v[i] / correct2;
      value[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

double plateau_step(PlateauState& state, double metric) {
  if (metric < state.best) {
    state.best = metric;
    state.bad_epochs = 0;
    return state.lr;
  }
  if (++state.bad_epochs >= state.patience) {
    state.lr = std::max(state.lr * state.factor, state.min_lr);
    state.bad_epochs = 0;
  }
  return state.lr;
}

}  // namespace polynet::nn
