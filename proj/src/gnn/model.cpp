#include "polynet/error.hpp"
#include "polynet/gnn.hpp"

#include <algorithm>
#include <random>

namespace polynet::gnn {

namespace {

constexpr std::array<PathType, 2> kTypes{PathType::Inner, PathType::Cross};

std::size_t type_index(PathType t) { return static_cast<std::size_t>(t); }

const char* type_name(PathType t) { return t == PathType::Inner ? "inner" : "cross"; }

}  // namespace

struct PolyhedronGnn::Cache {
  struct Layer {
    nn::Mlp::Cache guide;
    nn::Matrix guide_out;
    std::array<nn::Mlp::Cache, 2> message;
    std::array<nn::Matrix, 2> message_out;  // before the path-type weight
  };
  std::vector<Layer> layers;
  nn::Mlp::Cache classifier;
};

PolyhedronGnn::PolyhedronGnn(const GnnConfig& cfg) : cfg_(cfg) {
  cfg_.check();
  std::mt19937_64 rng(cfg_.seed);
  const auto d = static_cast<std::size_t>(cfg_.hidden);

  nn::MlpSpec guide_spec;
  guide_spec.dims = {static_cast<std::size_t>(cfg_.guide_input_dim()), d};
  guide_spec.batchnorm_output = true;

  nn::MlpSpec message_spec;
  message_spec.dims = {4 * d, d, d, d, d};
  message_spec.batchnorm_output = true;

  layers_.reserve(static_cast<std::size_t>(cfg_.layers));
  for (int l = 0; l < cfg_.layers; ++l) {
    const std::string prefix = "layer" + std::to_string(l);
    LayerParams layer;
    layer.guide = nn::Mlp(guide_spec, rng, prefix + ".guide");
    for (PathType t : kTypes) {
      layer.message[type_index(t)] = nn::Mlp(message_spec, rng, prefix + ".message." + type_name(t));
      layer.weight[type_index(t)] = nn::Parameter(prefix + ".w." + type_name(t), 1, 1, 1.0);
    }
    layers_.push_back(std::move(layer));
  }

  nn::MlpSpec head_spec;
  head_spec.dims = {static_cast<std::size_t>(cfg_.embedding_dim()), d, d, d, static_cast<std::size_t>(cfg_.num_classes)};
  classifier_ = nn::Mlp(head_spec, rng, "classifier");
}

EmbeddingOutput PolyhedronGnn::forward(const GraphBatch& batch, nn::Mode mode, bool with_classifier) {
  return run_forward(batch, mode, with_classifier, nullptr);
}

EmbeddingOutput PolyhedronGnn::run_forward(const GraphBatch& batch, nn::Mode mode, bool with_classifier,
                                           Cache* cache) {
  if (batch.path_count() == 0) throw Error(ErrorCode::EmptyGraph, "batch has no two-hop paths");
  if (batch.guide_input.cols() != static_cast<std::size_t>(cfg_.guide_input_dim()))
    throw Error(ErrorCode::Dimension, "guide input has " + std::to_string(batch.guide_input.cols()) +
                                          " columns, model expects " + std::to_string(cfg_.guide_input_dim()));
  const auto d = static_cast<std::size_t>(cfg_.hidden);
  const auto nodes = static_cast<std::size_t>(batch.node_count());
  if (cache) cache->layers.assign(layers_.size(), {});

  EmbeddingOutput out;
  out.embedding = nn::Matrix(static_cast<std::size_t>(batch.graph_count), static_cast<std::size_t>(cfg_.embedding_dim()));
  nn::Matrix h(nodes, d);

  for (std::size_t l = 0; l < layers_.size(); ++l) {
    LayerParams& layer = layers_[l];
    Cache::Layer* lc = cache ? &cache->layers[l] : nullptr;
    const nn::Matrix g = layer.guide.forward(batch.guide_input, mode, lc ? &lc->guide : nullptr);

    nn::Matrix next(nodes, d);
    for (PathType t : kTypes) {
      const auto& rows = batch.rows_by_type[type_index(t)];
      if (rows.empty()) continue;
      nn::Matrix input(rows.size(), 4 * d);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto p = static_cast<std::size_t>(rows[r]);
        auto dst = input.row(r);
        const auto hi = h.row(static_cast<std::size_t>(batch.path_i[p]));
        const auto hj = h.row(static_cast<std::size_t>(batch.path_j[p]));
        const auto hk = h.row(static_cast<std::size_t>(batch.path_k[p]));
        const auto gp = g.row(p);
        std::copy(hi.begin(), hi.end(), dst.begin());
        std::copy(hj.begin(), hj.end(), dst.begin() + static_cast<std::ptrdiff_t>(d));
        std::copy(hk.begin(), hk.end(), dst.begin() + static_cast<std::ptrdiff_t>(2 * d));
        std::copy(gp.begin(), gp.end(), dst.begin() + static_cast<std::ptrdiff_t>(3 * d));
      }
      nn::Matrix message =
          layer.message[type_index(t)].forward(input, mode, lc ? &lc->message[type_index(t)] : nullptr);
      const double w = layer.weight[type_index(t)].value(0, 0);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        auto dst = next.row(static_cast<std::size_t>(batch.path_i[static_cast<std::size_t>(rows[r])]));
        const auto src = message.row(r);
        for (std::size_t c = 0; c < d; ++c) dst[c] += w * src[c];
      }
      if (lc) lc->message_out[type_index(t)] = std::move(message);
    }

    for (std::size_t v = 0; v < nodes; ++v) {
      auto dst = out.embedding.row(static_cast<std::size_t>(batch.node_graph[v]));
      const auto src = next.row(v);
      for (std::size_t c = 0; c < d; ++c) dst[l * d + c] += src[c];
    }
    h = std::move(next);
  }

  if (with_classifier) out.logits = classifier_.forward(out.embedding, mode, cache ? &cache->classifier : nullptr);
  return out;
}

void PolyhedronGnn::run_backward(const GraphBatch& batch, Cache& cache, const nn::Matrix& grad_logits) {
  const auto d = static_cast<std::size_t>(cfg_.hidden);
  const auto nodes = static_cast<std::size_t>(batch.node_count());
  const nn::Matrix grad_embedding = classifier_.backward(cache.classifier, grad_logits);

  nn::Matrix grad_h(nodes, d);  // d loss / d h^(l+1) through later layers
  for (std::size_t l = layers_.size(); l-- > 0;) {
    LayerParams& layer = layers_[l];
    Cache::Layer& lc = cache.layers[l];

    for (std::size_t v = 0; v < nodes; ++v) {
      auto dst = grad_h.row(v);
      const auto src = grad_embedding.row(static_cast<std::size_t>(batch.node_graph[v]));
      for (std::size_t c = 0; c < d; ++c) dst[c] += src[l * d + c];
    }

    nn::Matrix grad_prev(nodes, d);
    nn::Matrix grad_guide(batch.path_count(), d);
    for (PathType t : kTypes) {
      const auto ti = type_index(t);
      const auto& rows = batch.rows_by_type[ti];
      if (rows.empty()) continue;
      const nn::Matrix& message = lc.message_out[ti];
      const double w = layer.weight[ti].value(0, 0);
      nn::Matrix grad_message(rows.size(), d);
      double grad_w = 0.0;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto up = grad_h.row(static_cast<std::size_t>(batch.path_i[static_cast<std::size_t>(rows[r])]));
        const auto m = message.row(r);
        auto dst = grad_message.row(r);
        for (std::size_t c = 0; c < d; ++c) {
          grad_w += up[c] * m[c];
          dst[c] = w * up[c];
        }
      }
      layer.weight[ti].grad(0, 0) += grad_w;

      const nn::Matrix grad_input = layer.message[ti].backward(lc.message[ti], grad_message);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto p = static_cast<std::size_t>(rows[r]);
        const auto src = grad_input.row(r);
        auto gi = grad_prev.row(static_cast<std::size_t>(batch.path_i[p]));
        auto gj = grad_prev.row(static_cast<std::size_t>(batch.path_j[p]));
        auto gk = grad_prev.row(static_cast<std::size_t>(batch.path_k[p]));
        auto gg = grad_guide.row(p);
        for (std::size_t c = 0; c < d; ++c) {
          gi[c] += src[c];
          gj[c] += src[d + c];
          gk[c] += src[2 * d + c];
          gg[c] += src[3 * d + c];
        }
      }
    }
    layer.guide.backward(lc.guide, grad_guide);
    grad_h = std::move(grad_prev);
  }
}

double PolyhedronGnn::loss_and_gradients(const GraphBatch& batch, const std::vector<int>& labels, nn::Mode mode) {
  if (labels.size() != static_cast<std::size_t>(batch.graph_count))
    throw Error(ErrorCode::Dimension, "one label per graph is required");
  for (nn::Parameter* p : parameters()) p->zero_grad();
  Cache cache;
  const EmbeddingOutput out = run_forward(batch, mode, true, &cache);
  const nn::LossResult loss = nn::cross_entropy(out.logits, labels);
  run_backward(batch, cache, loss.grad);
  return loss.loss;
}

double PolyhedronGnn::train_step(const GraphBatch& batch, const std::vector<int>& labels, nn::AdamState& adam,
                                 double lr) {
  const double loss = loss_and_gradients(batch, labels);
  const auto params = parameters();
  nn::adam_step(params, adam, lr);
  return loss;
}

std::vector<nn::Parameter*> PolyhedronGnn::parameters() {
  std::vector<nn::Parameter*> out;
  for (auto& layer : layers_) {
    for (nn::Parameter* p : layer.guide.parameters()) out.push_back(p);
    for (PathType t : kTypes) {
      for (nn::Parameter* p : layer.message[type_index(t)].parameters()) out.push_back(p);
      out.push_back(&layer.weight[type_index(t)]);
    }
  }
  for (nn::Parameter* p : classifier_.parameters()) out.push_back(p);
  return out;
}

std::vector<nn::Matrix*> PolyhedronGnn::buffers() {
  std::vector<nn::Matrix*> out;
  for (auto& layer : layers_) {
    for (nn::Matrix* b : layer.guide.buffers()) out.push_back(b);
    for (PathType t : kTypes)
      for (nn::Matrix* b : layer.message[type_index(t)].buffers()) out.push_back(b);
  }
  for (nn::Matrix* b : classifier_.buffers()) out.push_back(b);
  return out;
}

nn::Parameter& PolyhedronGnn::path_weight(int layer, PathType type) {
  return layers_.at(static_cast<std::size_t>(layer)).weight[type_index(type)];
}

}  // namespace polynet::gnn
