#include "polynet/sag.hpp"

#include "polynet/error.hpp"

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>

namespace polynet {

namespace {

std::uint64_t edge_key(int tail, int head) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(tail)) << 32) |
         static_cast<std::uint32_t>(head);
}

std::string edge_name(const DirectedEdge& e) { return std::to_string(e.tail) + "->" + std::to_string(e.head); }

}  // namespace

SagTopology::SagTopology(int node_count, std::vector<DirectedEdge> edges, std::vector<FaceHyperedge> faces,
                         std::vector<AttrVector> attrs)
    : node_count_(node_count), edges_(std::move(edges)), faces_(std::move(faces)), attrs_(std::move(attrs)) {
  std::unordered_map<std::uint64_t, int> by_endpoints;
  by_endpoints.reserve(edges_.size());
  std::vector<int> out_degree(static_cast<std::size_t>(node_count_), 0);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto& edge = edges_[e];
    if (edge.tail < 0 || edge.tail >= node_count_ || edge.head < 0 || edge.head >= node_count_)
      throw Error(ErrorCode::Structural, "edge " + std::to_string(e) + " references a missing node");
    if (!by_endpoints.emplace(edge_key(edge.tail, edge.head), static_cast<int>(e)).second)
      throw Error(ErrorCode::InvariantViolation, "directed edge " + edge_name(edge) + " appears twice");
    ++out_degree[static_cast<std::size_t>(edge.tail)];
  }

  opposite_.assign(edges_.size(), -1);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto& edge = edges_[e];
    const auto it = by_endpoints.find(edge_key(edge.head, edge.tail));
    if (it == by_endpoints.end())
      throw Error(ErrorCode::InvariantViolation, "edge " + edge_name(edge) + " has no opposite edge");
    opposite_[e] = it->second;
  }

  out_offsets_.assign(static_cast<std::size_t>(node_count_) + 1, 0);
  for (int v = 0; v < node_count_; ++v)
    out_offsets_[static_cast<std::size_t>(v) + 1] = out_offsets_[static_cast<std::size_t>(v)] + out_degree[static_cast<std::size_t>(v)];
  out_edges_.assign(edges_.size(), -1);
  std::vector<int> fill(out_offsets_.begin(), out_offsets_.end() - 1);
  for (std::size_t e = 0; e < edges_.size(); ++e)
    out_edges_[static_cast<std::size_t>(fill[static_cast<std::size_t>(edges_[e].tail)]++)] = static_cast<int>(e);
}

int SagTopology::opposite_edge(int e) const {
  if (e < 0 || static_cast<std::size_t>(e) >= opposite_.size())
    throw Error(ErrorCode::Structural, "edge id " + std::to_string(e) + " out of range");
  return opposite_[static_cast<std::size_t>(e)];
}

std::span<const int> SagTopology::out_edges(int node) const {
  if (node < 0 || node >= node_count_) throw Error(ErrorCode::Structural, "node id out of range");
  const auto begin = static_cast<std::size_t>(out_offsets_[static_cast<std::size_t>(node)]);
  const auto end = static_cast<std::size_t>(out_offsets_[static_cast<std::size_t>(node) + 1]);
  return std::span<const int>(out_edges_).subspan(begin, end - begin);
}

std::vector<int> SagTopology::neighbors(int node) const {
  std::vector<int> out;
  for (int e : out_edges(node)) out.push_back(edges_[static_cast<std::size_t>(e)].head);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> SagTopology::face_loop(int face) const {
  const auto& hyper = faces_.at(static_cast<std::size_t>(face));
  if (hyper.edge_ids.size() < 3)
    throw Error(ErrorCode::InconsistentHyperedge, "face " + std::to_string(face) + " has fewer than 3 edges");
  std::vector<int> loop;
  loop.reserve(hyper.edge_ids.size());
  int current = edge(hyper.edge_ids.front()).tail;
  const int start = current;
  for (int e : hyper.edge_ids) {
    const auto& edge_ref = edge(e);
    if (edge_ref.tail != current)
      throw Error(ErrorCode::InconsistentHyperedge,
                  "face " + std::to_string(face) + ": edge " + edge_name(edge_ref) + " does not continue the chain");
    loop.push_back(current);
    current = edge_ref.head;
  }
  if (current != start)
    throw Error(ErrorCode::InconsistentHyperedge, "face " + std::to_string(face) + ": edge chain does not close");
  return loop;
}

const AttrVector& SagTopology::face_attr(int face) const {
  const auto idx = faces_.at(static_cast<std::size_t>(face)).attr_index;
  return attrs_.at(static_cast<std::size_t>(idx));
}

void SagTopology::check() const {
  std::vector<int> owner(edges_.size(), -1);
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    const auto loop = face_loop(static_cast<int>(f));
    for (int e : faces_[f].edge_ids) {
      if (owner[static_cast<std::size_t>(e)] != -1)
        throw Error(ErrorCode::InvariantViolation, "edge " + std::to_string(e) + " belongs to two faces");
      owner[static_cast<std::size_t>(e)] = static_cast<int>(f);
      if (edges_[static_cast<std::size_t>(e)].face != static_cast<int>(f))
        throw Error(ErrorCode::InvariantViolation, "edge " + std::to_string(e) + " has a stale face id");
    }
    const int attr = faces_[f].attr_index;
    if (attr < 0 || static_cast<std::size_t>(attr) >= attrs_.size())
      throw Error(ErrorCode::InvariantViolation, "face " + std::to_string(f) + " has no attribute entry");
  }
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (owner[e] == -1) throw Error(ErrorCode::InvariantViolation, "edge " + std::to_string(e) + " has no face");
    if (edges_[e].tail == edges_[e].head)
      throw Error(ErrorCode::InvariantViolation, "edge " + std::to_string(e) + " is a self loop");
    const int twin = opposite_[e];
    if (edges_[static_cast<std::size_t>(twin)].face == edges_[e].face)
      throw Error(ErrorCode::InvariantViolation,
                  "edge " + edge_name(edges_[e]) + " and its opposite lie in the same face");
  }
}

SagTopology topology_from_loops(int node_count, const std::vector<PolygonFace>& faces) {
  std::vector<DirectedEdge> edges;
  std::vector<FaceHyperedge> hyper;
  std::vector<AttrVector> attrs;
  hyper.reserve(faces.size());
  attrs.reserve(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const auto& loop = faces[f].loop;
    FaceHyperedge h;
    h.attr_index = static_cast<int>(f);
    for (std::size_t a = 0; a < loop.size(); ++a) {
      h.edge_ids.push_back(static_cast<int>(edges.size()));
      edges.push_back({loop[a], loop[(a + 1) % loop.size()], static_cast<int>(f)});
    }
    hyper.push_back(std::move(h));
    attrs.push_back(faces[f].attr);
  }
  SagTopology topology(node_count, std::move(edges), std::move(hyper), std::move(attrs));
  topology.check();
  return topology;
}

Sag build_sag(const Polyhedron& p, double coplanarity_tol) {
  const auto report = validate_polyhedron(p, coplanarity_tol);
  if (!report.ok) throw Error(ErrorCode::InvalidPolyhedron, report.summary());
  return Sag(p.vertices, topology_from_loops(static_cast<int>(p.vertices.size()), p.faces));
}

Polyhedron sag_to_polyhedron(const Sag& g) {
  const auto& topology = g.topology();
  Polyhedron p;
  p.vertices = g.coords();
  p.faces.reserve(topology.faces().size());
  for (std::size_t f = 0; f < topology.faces().size(); ++f)
    p.faces.push_back(PolygonFace{topology.face_loop(static_cast<int>(f)), topology.face_attr(static_cast<int>(f))});
  return p;
}

}  // namespace polynet
