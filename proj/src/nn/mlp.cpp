#include "polynet/nn/mlp.hpp"

#include "polynet/error.hpp"

#include <cmath>
#include <limits>

namespace polynet::nn {

Mlp::Mlp(const MlpSpec& spec, std::mt19937_64& rng, const std::string& name) : spec_(spec) {
  if (spec.dims.size() < 2) throw Error(ErrorCode::Dimension, "an MLP needs input and output dimensions");
  const std::size_t depth = spec.dims.size() - 1;
  layers_.reserve(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    const std::size_t in = spec.dims[l];
    const std::size_t out = spec.dims[l + 1];
    if (in == 0 || out == 0) throw Error(ErrorCode::Dimension, "MLP layer dimensions must be positive");
    const bool last = l + 1 == depth;
    const std::string prefix = name + "." + std::to_string(l);

    Layer layer;
    layer.batchnorm = last ? spec.batchnorm_output : spec.batchnorm_hidden;
    layer.relu = !last;
    layer.weight = Parameter(prefix + ".weight", out, in);
    const double bound = std::sqrt(6.0 / static_cast<double>(in));
    std::uniform_real_distribution<double> init(-bound, bound);
    for (double& w : layer.weight.value.values()) w = init(rng);
    if (layer.batchnorm) {
      layer.gamma = Parameter(prefix + ".gamma", 1, out, 1.0);
      layer.beta = Parameter(prefix + ".beta", 1, out, 0.0);
      layer.running_mean = Matrix(1, out, 0.0);
      layer.running_var = Matrix(1, out, 1.0);
    } else {
      layer.bias = Parameter(prefix + ".bias", 1, out, 0.0);
    }
    layers_.push_back(std::move(layer));
  }
}

Matrix Mlp::forward(const Matrix& x, Mode mode, Cache* cache) {
  if (x.cols() != in_dim())
    throw Error(ErrorCode::Dimension, "MLP expects " + std::to_string(in_dim()) + " input columns, got " +
                                          std::to_string(x.cols()));
  if (cache) {
    cache->mode = mode;
    cache->layers.assign(layers_.size(), {});
  }
  Matrix current = x;
  const std::size_t batch = x.rows();
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Layer& layer = layers_[l];
    const std::size_t out = layer.weight.value.rows();
    Matrix z = matmul_nt(current, layer.weight.value);
    LayerCache* lc = cache ? &cache->layers[l] : nullptr;
    if (lc) lc->input = std::move(current);

    if (layer.batchnorm) {
      if (mode == Mode::Train && batch < 2)
        throw Error(ErrorCode::BatchTooSmall, "batchnorm in train mode needs at least 2 rows");
      std::vector<double> mean(out, 0.0);
      std::vector<double> var(out, 0.0);
      if (mode == Mode::Train) {
        for (std::size_t r = 0; r < batch; ++r)
          for (std::size_t c = 0; c < out; ++c) mean[c] += z(r, c);
        for (double& m : mean) m /= static_cast<double>(batch);
        for (std::size_t r = 0; r < batch; ++r)
          for (std::size_t c = 0; c < out; ++c) {
            const double d = z(r, c) - mean[c];
            var[c] += d * d;
          }
        for (double& v : var) v /= static_cast<double>(batch);
        const double unbias = static_cast<double>(batch) / static_cast<double>(batch - 1);
        for (std::size_t c = 0; c < out; ++c) {
          layer.running_mean(0, c) = (1.0 - spec_.bn_momentum) * layer.running_mean(0, c) + spec_.bn_momentum * mean[c];
          layer.running_var(0, c) =
              (1.0 - spec_.bn_momentum) * layer.running_var(0, c) + spec_.bn_momentum * var[c] * unbias;
        }
      } else {
        for (std::size_t c = 0; c < out; ++c) {
          mean[c] = layer.running_mean(0, c);
          var[c] = layer.running_var(0, c);
        }
      }
      std::vector<double> inv_std(out);
      for (std::size_t c = 0; c < out; ++c) inv_std[c] = 1.0 / std::sqrt(var[c] + spec_.bn_eps);
      if (lc) lc->normalized = Matrix(batch, out);
      for (std::size_t r = 0; r < batch; ++r) {
        for (std::size_t c = 0; c < out; ++c) {
          const double xhat = (z(r, c) - mean[c]) * inv_std[c];
          if (lc) lc->normalized(r, c) = xhat;
          z(r, c) = layer.gamma.value(0, c) * xhat + layer.beta.value(0, c);
        }
      }
      if (lc) lc->inv_std = std::move(inv_std);
    } else {
      for (std::size_t r = 0; r < batch; ++r)
        for (std::size_t c = 0; c < out; ++c) z(r, c) += layer.bias.value(0, c);
    }
    if (layer.relu)
      for (double& v : z.values()) v = v > 0.0 ? v : 0.0;
    if (lc) lc->output = z;
    current = std::move(z);
  }
  return current;
}

Matrix Mlp::backward(const Cache& cache, const Matrix& grad_output) {
  if (cache.layers.size() != layers_.size()) throw Error(ErrorCode::Dimension, "MLP cache does not match the model");
  Matrix grad = grad_output;
  for (std::size_t idx = layers_.size(); idx-- > 0;) {
    Layer& layer = layers_[idx];
    const LayerCache& lc = cache.layers[idx];
    if (!grad.same_shape(lc.output)) throw Error(ErrorCode::Dimension, "MLP gradient shape mismatch");
    const std::size_t batch = grad.rows();
    const std::size_t out = grad.cols();

    if (layer.relu) {
      for (std::size_t n = 0; n < grad.size(); ++n)
        if (!(lc.output.values()[n] > 0.0)) grad.values()[n] = 0.0;
    }

    if (layer.batchnorm) {
      std::vector<double> sum_dxhat(out, 0.0);
      std::vector<double> sum_dxhat_xhat(out, 0.0);
      for (std::size_t r = 0; r < batch; ++r) {
        for (std::size_t c = 0; c < out; ++c) {
          const double g = grad(r, c);
          const double xhat = lc.normalized(r, c);
          layer.gamma.grad(0, c) += g * xhat;
          layer.beta.grad(0, c) += g;
          const double dxhat = g * layer.gamma.value(0, c);
          grad(r, c) = dxhat;
          sum_dxhat[c] += dxhat;
          sum_dxhat_xhat[c] += dxhat * xhat;
        }
      }
      if (cache.mode == Mode::Train) {
        const double inv_n = 1.0 / static_cast<double>(batch);
        for (std::size_t r = 0; r < batch; ++r)
          for (std::size_t c = 0; c < out; ++c)
            grad(r, c) = lc.inv_std[c] * (grad(r, c) - inv_n * sum_dxhat[c] - lc.normalized(r, c) * inv_n * sum_dxhat_xhat[c]);
      } else {
        for (std::size_t r = 0; r < batch; ++r)
          for (std::size_t c = 0; c < out; ++c) grad(r, c) *= lc.inv_std[c];
      }
    } else {
      for (std::size_t r = 0; r < batch; ++r)
        for (std::size_t c = 0; c < out; ++c) layer.bias.grad(0, c) += grad(r, c);
    }

    matmul_tn_accumulate(grad, lc.input, layer.weight.grad);
    grad = matmul_nn(grad, layer.weight.value);
  }
  return grad;
}

std::vector<Parameter*> Mlp::parameters() {
  std::vector<Parameter*> out;
  for (auto& layer : layers_) {
    out.push_back(&layer.weight);
    if (layer.batchnorm) {
      out.push_back(&layer.gamma);
      out.push_back(&layer.beta);
    } else {
      out.push_back(&layer.bias);
    }
  }
  return out;
}

std::vector<Matrix*> Mlp::buffers() {
  std::vector<Matrix*> out;
  for (auto& layer : layers_) {
    if (!layer.batchnorm) continue;
    out.push_back(&layer.running_mean);
    out.push_back(&layer.running_var);
  }
  return out;
}

Matrix softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    double peak = -std::numeric_limits<double>::infinity();
    for (double v : logits.row(r)) peak = std::max(peak, v);
    double total = 0.0;
    for (std::size_t c = 0; c < logits.cols(); ++c) {
      out(r, c) = std::exp(logits(r, c) - peak);
      total += out(r, c);
    }
    for (std::size_t c = 0; c < logits.cols(); ++c) out(r, c) /= total;
  }
  return out;
}

LossResult cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
  if (labels.size() != logits.rows()) throw Error(ErrorCode::Dimension, "one label per logit row is required");
  if (logits.rows() == 0) throw Error(ErrorCode::Dimension, "empty batch");
  const auto classes = static_cast<int>(logits.cols());
  LossResult result;
  result.grad = Matrix(logits.rows(), logits.cols());
  const double inv_batch = 1.0 / static_cast<double>(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const int label = labels[r];
    if (label < 0 || label >= classes)
      throw Error(ErrorCode::Label, "label " + std::to_string(label) + " outside [0, " + std::to_string(classes) + ")");
    double peak = -std::numeric_limits<double>::infinity();
    for (double v : logits.row(r)) peak = std::max(peak, v);
    double total = 0.0;
    for (double v : logits.row(r)) total += std::exp(v - peak);
    const double log_total = std::log(total);
    result.loss += (log_total - (logits(r, static_cast<std::size_t>(label)) - peak)) * inv_batch;
    for (std::size_t c = 0; c < logits.cols(); ++c) {
      const double p = std::exp(logits(r, c) - peak - log_total);
      result.grad(r, c) = (p - (static_cast<int>(c) == label ? 1.0 : 0.0)) * inv_batch;
    }
  }
  return result;
}

}  // namespace polynet::nn
