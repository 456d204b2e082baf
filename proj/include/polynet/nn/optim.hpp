#pragma once

#include "polynet/nn/matrix.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace polynet::nn {

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<Matrix> m;
  std::vector<Matrix> v;
};

// Bias-corrected Adam. Moment buffers are created on the first call.
void adam_step(std::span<Parameter* const> params, AdamState& state, double lr);

/// Reduce-on-plateau in min mode: after `patience` consecutive epochs without
/// a strict improvement the rate is multiplied by `factor`, floored at min_lr.
struct PlateauState {
  double factor = 0.5;
  int patience = 10;
  double min_lr = 1e-6;
  double lr = 1e-3;
  double best = std::numeric_limits<double>::infinity();
  int bad_epochs = 0;
};

double plateau_step(PlateauState& state, double metric);

struct GradCheckOptions {
  double step = 1e-5;
  std::size_t max_entries = 10000;  // random subsample above this many scalars
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst;  // "param[index]"
};

// `loss` evaluates the objective at the current parameter values; `analytic`
// zeroes and refills every Parameter::grad. Parameter values are restored.
GradCheckResult grad_check(std::span<Parameter* const> params, const std::function<double()>& loss,
                           const std::function<void()>& analytic, const GradCheckOptions& options = {});

}  // namespace polynet::nn
