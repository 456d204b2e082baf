#pragma once

#include "polynet/nn/matrix.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace polynet::nn {

enum class Mode { Train, Eval };

struct MlpSpec {
  std::vector<std::size_t> dims;  // input, hidden..., output
  bool batchnorm_hidden = true;
  bool batchnorm_output = false;
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;
};

/// Affine layers with optional batch normalization, ReLU on every hidden
/// layer and identity on the output. A layer followed by batchnorm carries no
/// bias; the batchnorm shift plays that role.
class Mlp {
 public:
  struct Layer {
    Parameter weight;  // out x in
    Parameter bias;    // 1 x out, empty when batchnorm follows
    bool batchnorm = false;
    Parameter gamma;  // 1 x out
    Parameter beta;   // 1 x out
    Matrix running_mean;
    Matrix running_var;
    bool relu = false;
  };

  struct LayerCache {
    Matrix input;
    Matrix normalized;  // x_hat, batchnorm only
    std::vector<double> inv_std;
    Matrix output;      // post-activation
  };

  struct Cache {
    Mode mode = Mode::Eval;
    std::vector<LayerCache> layers;
  };

  Mlp() = default;
  Mlp(const MlpSpec& spec, std::mt19937_64& rng, const std::string& name = "mlp");

  std::size_t in_dim() const { return spec_.dims.front(); }
  std::size_t out_dim() const { return spec_.dims.back(); }
  const MlpSpec& spec() const { return spec_; }

  // Train mode uses batch statistics and updates running stats; it needs at
  // least two rows when any layer has batchnorm.
  Matrix forward(const Matrix& x, Mode mode, Cache* cache = nullptr);
  // Accumulates parameter gradients and returns d loss / d input.
  Matrix backward(const Cache& cache, const Matrix& grad_output);

  std::vector<Parameter*> parameters();
  std::vector<Matrix*> buffers();  // running statistics
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

 private:
  MlpSpec spec_;
  std::vector<Layer> layers_;
};

struct LossResult {
  double loss = 0.0;
  Matrix grad;  // d loss / d logits
};

// Mean softmax cross-entropy with max-shift stabilization.
LossResult cross_entropy(const Matrix& logits, const std::vector<int>& labels);

Matrix softmax(const Matrix& logits);

}  // namespace polynet::nn
