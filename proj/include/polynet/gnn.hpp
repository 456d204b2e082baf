#pragma once

#include "polynet/nn/mlp.hpp"
#include "polynet/nn/optim.hpp"
#include "polynet/rigidrep.hpp"
#include "polynet/sag.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace polynet::gnn {

// Which faces feed the guiding embedding: `Reversed` takes the faces owning
// e_{j,i} and e_{k,j} (the twins of the path edges), `Forward` the faces
// owning e_{i,j} and e_{j,k}.
enum class AttrOrientation { Reversed, Forward };

struct GnnConfig {
  int layers = 2;
  int hidden = 64;
  int attr_dim = 0;
  int num_classes = 2;
  bool include_backtracking = true;
  AttrOrientation attr_orientation = AttrOrientation::Reversed;
  std::uint64_t seed = 0;

  int guide_input_dim() const { return 4 + 2 * attr_dim; }
  int embedding_dim() const { return layers * hidden; }
  void check() const;
};

/// Per-graph inputs that never change during training.
struct GraphFeatures {
  int node_count = 0;
  std::vector<int> path_i;
  std::vector<int> path_j;
  std::vector<int> path_k;
  std::vector<PathType> path_type;
  // One row per path: d1/l, d2/l, theta/pi, phi/pi, a_1 (A), a_2 (A), where
  // l is the graph's mean edge length.
  nn::Matrix guide_input;

  std::size_t path_count() const { return path_i.size(); }
};

GraphFeatures precompute_graph_features(const Sag& g, const GnnConfig& cfg);

// Zeroes every attribute column in place (face-attribute ablation).
void mask_attributes(GraphFeatures& features, int attr_dim);

/// Several graphs concatenated with node ids shifted into one index space.
struct GraphBatch {
  int graph_count = 0;
  std::vector<int> node_offset;  // graph_count + 1
  std::vector<int> node_graph;   // graph id per node
  std::vector<int> path_i;
  std::vector<int> path_j;
  std::vector<int> path_k;
  std::array<std::vector<int>, 2> rows_by_type;  // path rows per PathType
  nn::Matrix guide_input;

  int node_count() const { return node_offset.empty() ? 0 : node_offset.back(); }
  std::size_t path_count() const { return path_i.size(); }

  static GraphBatch assemble(std::span<const GraphFeatures* const> graphs);
};

struct EmbeddingOutput {
  nn::Matrix embedding;  // graphs x (L * D)
  nn::Matrix logits;     // graphs x classes, empty in embed-only mode
};

class PolyhedronGnn {
 public:
  struct Cache;

  explicit PolyhedronGnn(const GnnConfig& cfg);

  const GnnConfig& config() const { return cfg_; }

  EmbeddingOutput forward(const GraphBatch& batch, nn::Mode mode, bool with_classifier = true);
  nn::Matrix embed(const GraphBatch& batch) { return forward(batch, nn::Mode::Eval, false).embedding; }

  // Zeroes gradients, runs a forward pass, cross-entropy and the full backward
  // pass. Returns the loss; gradients are left in the parameters. Eval mode
  // treats batch normalization as the fixed affine map of its running stats.
  double loss_and_gradients(const GraphBatch& batch, const std::vector<int>& labels,
                            nn::Mode mode = nn::Mode::Train);
  // loss_and_gradients followed by one Adam update.
  double train_step(const GraphBatch& batch, const std::vector<int>& labels, nn::AdamState& adam, double lr);

  std::vector<nn::Parameter*> parameters();
  std::vector<nn::Matrix*> buffers();
  nn::Parameter& path_weight(int layer, PathType type);

 private:
  EmbeddingOutput run_forward(const GraphBatch& batch, nn::Mode mode, bool with_classifier, Cache* cache);
  void run_backward(const GraphBatch& batch, Cache& cache, const nn::Matrix& grad_logits);

  struct LayerParams {
    nn::Mlp guide;
    std::array<nn::Mlp, 2> message;  // indexed by PathType
    std::array<nn::Parameter, 2> weight;
  };

  GnnConfig cfg_;
  std::vector<LayerParams> layers_;
  nn::Mlp classifier_;
};

}  // namespace polynet::gnn
