#include "polynet/error.hpp"
#include "polynet/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace polynet::gnn {

void GnnConfig::check() const {
  if (layers < 1) throw Error(ErrorCode::Config, "layers must be >= 1");
  if (hidden < 1) throw Error(ErrorCode::Config, "hidden dimension must be >= 1");
  if (attr_dim < 0) throw Error(ErrorCode::Config, "attribute dimension must be >= 0");
  if (num_classes < 1) throw Error(ErrorCode::Config, "num_classes must be >= 1");
}

GraphFeatures precompute_graph_features(const Sag& g, const GnnConfig& cfg) {
  cfg.check();
  const auto& topology = g.topology();
  const auto attr_dim = static_cast<std::size_t>(cfg.attr_dim);
  for (std::size_t f = 0; f < topology.faces().size(); ++f) {
    if (topology.face_attr(static_cast<int>(f)).size() != attr_dim)
      throw Error(ErrorCode::Dimension, "face " + std::to_string(f) + " has " +
                                            std::to_string(topology.face_attr(static_cast<int>(f)).size()) +
                                            " attributes, expected " + std::to_string(attr_dim));
  }

  const PathSet paths = enumerate_paths(topology, cfg.include_backtracking);
  if (paths.paths.empty()) throw Error(ErrorCode::EmptyGraph, "graph has no two-hop paths");
  const RigidSet rigid = compute_rigid_set(g, paths);

  double total_length = 0.0;
  for (const auto& e : topology.edges()) total_length += (g.coord(e.head) - g.coord(e.tail)).norm();
  const double mean_length = total_length / static_cast<double>(topology.edges().size());

  GraphFeatures out;
  out.node_count = g.node_count();
  const std::size_t count = paths.paths.size();
  out.path_i.reserve(count);
  out.path_j.reserve(count);
  out.path_k.reserve(count);
  out.path_type.reserve(count);
  out.guide_input = nn::Matrix(count, static_cast<std::size_t>(cfg.guide_input_dim()));

  for (std::size_t r = 0; r < count; ++r) {
    const auto& path = paths.paths[r];
    const RigidTuple& t = rigid.at({path.i, path.j, path.k});
    out.path_i.push_back(path.i);
    out.path_j.push_back(path.j);
    out.path_k.push_back(path.k);
    out.path_type.push_back(t.type);

    auto row = out.guide_input.row(r);
    row[0] = t.d1 / mean_length;
    row[1] = t.d2 / mean_length;
    row[2] = t.theta / std::numbers::pi;
    row[3] = t.phi / std::numbers::pi;

    int face_a = 0;
    int face_b = 0;
    if (cfg.attr_orientation == AttrOrientation::Reversed) {
      face_a = topology.edge(topology.opposite_edge(path.e1)).face;
      face_b = topology.edge(topology.opposite_edge(path.e2)).face;
    } else {
      face_a = topology.edge(path.e1).face;
      face_b = topology.edge(path.e2).face;
    }
    const auto& attr_a = topology.face_attr(face_a);
    const auto& attr_b = topology.face_attr(face_b);
    for (std::size_t a = 0; a < attr_dim; ++a) {
      row[4 + a] = attr_a[a];
      row[4 + attr_dim + a] = attr_b[a];
    }
  }
  return out;
}

void mask_attributes(GraphFeatures& features, int attr_dim) {
  const auto cols = features.guide_input.cols();
  for (std::size_t r = 0; r < features.guide_input.rows(); ++r)
    for (std::size_t c = 4; c < cols && c < 4 + 2 * static_cast<std::size_t>(attr_dim); ++c) features.guide_input(r, c) = 0.0;
}

GraphBatch GraphBatch::assemble(std::span<const GraphFeatures* const> graphs) {
  GraphBatch batch;
  batch.graph_count = static_cast<int>(graphs.size());
  batch.node_offset.push_back(0);
  std::size_t total_paths = 0;
  std::size_t cols = 0;
  for (const GraphFeatures* g : graphs) {
    if (g->path_count() == 0) throw Error(ErrorCode::EmptyGraph, "graph has no two-hop paths");
    total_paths += g->path_count();
    if (cols == 0) cols = g->guide_input.cols();
    if (g->guide_input.cols() != cols) throw Error(ErrorCode::Dimension, "graphs disagree on guide input width");
  }
  batch.guide_input = nn::Matrix(total_paths, cols);
  batch.path_i.reserve(total_paths);
  batch.path_j.reserve(total_paths);
  batch.path_k.reserve(total_paths);

  std::size_t row = 0;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const GraphFeatures& g = *graphs[gi];
    const int base = batch.node_offset.back();
    for (int v = 0; v < g.node_count; ++v) batch.node_graph.push_back(static_cast<int>(gi));
    for (std::size_t p = 0; p < g.path_count(); ++p, ++row) {
      batch.path_i.push_back(base + g.path_i[p]);
      batch.path_j.push_back(base + g.path_j[p]);
      batch.path_k.push_back(base + g.path_k[p]);
      batch.rows_by_type[static_cast<std::size_t>(g.path_type[p])].push_back(static_cast<int>(row));
      std::copy(g.guide_input.row(p).begin(), g.guide_input.row(p).end(), batch.guide_input.row(row).begin());
    }
    batch.node_offset.push_back(base + g.node_count);
  }
  return batch;
}

}  // namespace polynet::gnn
