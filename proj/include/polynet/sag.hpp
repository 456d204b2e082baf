#pragma once

#include "polynet/geom.hpp"

#include <span>
#include <vector>

namespace polynet {

struct DirectedEdge {
  int tail = -1;
  int head = -1;
  int face = -1;
};

struct FaceHyperedge {
  std::vector<int> edge_ids;  // head of edge k is the tail of edge k+1, cyclically
  int attr_index = -1;
};

/// Connectivity of a surface-attributed graph without node coordinates.
///
/// Node ids are the vertex indices of the source polyhedron. The constructor
/// indexes outgoing edges and opposite edges; it throws InvariantViolation when
/// an edge has no reverse twin, so lookups never fail later.
class SagTopology {
 public:
  SagTopology() = default;
  SagTopology(int node_count, std::vector<DirectedEdge> edges, std::vector<FaceHyperedge> faces,
              std::vector<AttrVector> attrs);

  int node_count() const { return node_count_; }
  const std::vector<DirectedEdge>& edges() const { return edges_; }
  const std::vector<FaceHyperedge>& faces() const { return faces_; }
  const std::vector<AttrVector>& attrs() const { return attrs_; }
  const DirectedEdge& edge(int e) const { return edges_.at(static_cast<std::size_t>(e)); }

  int opposite_edge(int e) const;
  std::span<const int> out_edges(int node) const;
  std::vector<int> neighbors(int node) const;

  // Node loop of a face, chased from its first edge's tail. Throws
  // InconsistentHyperedge when the edge chain does not close.
  std::vector<int> face_loop(int face) const;
  const AttrVector& face_attr(int face) const;

  // Full invariant check; throws on the first violation.
  void check() const;

 private:
  int node_count_ = 0;
  std::vector<DirectedEdge> edges_;
  std::vector<FaceHyperedge> faces_;
  std::vector<AttrVector> attrs_;
  std::vector<int> opposite_;
  std::vector<int> out_offsets_;
  std::vector<int> out_edges_;
};

class Sag {
 public:
  Sag() = default;
  Sag(std::vector<Point3> coords, SagTopology topology)
      : coords_(std::move(coords)), topology_(std::move(topology)) {}

  const std::vector<Point3>& coords() const { return coords_; }
  const SagTopology& topology() const { return topology_; }
  const Point3& coord(int node) const { return coords_.at(static_cast<std::size_t>(node)); }

  int node_count() const { return topology_.node_count(); }
  const std::vector<DirectedEdge>& edges() const { return topology_.edges(); }
  const std::vector<FaceHyperedge>& faces() const { return topology_.faces(); }
  int opposite_edge(int e) const { return topology_.opposite_edge(e); }
  std::vector<int> neighbors(int node) const { return topology_.neighbors(node); }

 private:
  std::vector<Point3> coords_;
  SagTopology topology_;
};

// Refuses invalid input with InvalidPolyhedron carrying the validation summary.
Sag build_sag(const Polyhedron& p, double coplanarity_tol = kDefaultCoplanarityTol);

Polyhedron sag_to_polyhedron(const Sag& g);

// Builds the topology directly from face loops; coordinates are never read.
SagTopology topology_from_loops(int node_count, const std::vector<PolygonFace>& faces);

}  // namespace polynet
