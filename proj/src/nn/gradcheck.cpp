#include "polynet/nn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace polynet::nn {

GradCheckResult grad_check(std::span<Parameter* const> params, const std::function<double()>& loss,
                           const std::function<void()>& analytic, const GradCheckOptions& options) {
  analytic();

  // (param, entry) pairs, subsampled deterministically when large.
  std::vector<std::pair<std::size_t, std::size_t>> entries;
  for (std::size_t p = 0; p < params.size(); ++p)
    for (std::size_t i = 0; i < params[p]->value.size(); ++i) entries.emplace_back(p, i);
  if (entries.size() > options.max_entries) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(entries.begin(), entries.end(), rng);
    entries.resize(options.max_entries);
    std::sort(entries.begin(), entries.end());
  }

  GradCheckResult result;
  for (const auto& [p, i] : entries) {
    double& slot = params[p]->value.values()[i];
    const double saved = slot;
    slot = saved + options.step;
    const double plus = loss();
    slot = saved - options.step;
    const double minus = loss();
    slot = saved;

    const double numeric = (plus - minus) / (2.0 * options.step);
    const double exact = params[p]->grad.values()[i];
    const double rel = std::abs(exact - numeric) / std::max({std::abs(exact), std::abs(numeric), 1e-8});
    ++result.checked;
    if (rel > result.max_rel_error || !std::isfinite(rel)) {
      result.max_rel_error = std::isfinite(rel) ? rel : std::numeric_limits<double>::infinity();
      result.worst = params[p]->name + "[" + std::to_string(i) + "]";
    }
  }
  return result;
}

}  // namespace polynet::nn
