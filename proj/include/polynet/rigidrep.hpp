#pragma once

#include "polynet/sag.hpp"

#include <array>
#include <iosfwd>
#include <map>
#include <utility>
#include <vector>

namespace polynet {

struct TwoHopPath {
  int i = -1;
  int j = -1;
  int k = -1;
  int e1 = -1;  // i -> j
  int e2 = -1;  // j -> k
};

/// Two-hop paths grouped by their target node i: the paths converging to node
/// v live in `paths[offsets[v] .. offsets[v+1])`.
struct PathSet {
  std::vector<TwoHopPath> paths;
  std::vector<std::size_t> offsets;

  std::span<const TwoHopPath> converging_to(int node) const {
    const auto b = offsets.at(static_cast<std::size_t>(node));
    return std::span<const TwoHopPath>(paths).subspan(b, offsets.at(static_cast<std::size_t>(node) + 1) - b);
  }
};

enum class PathType { Inner, Cross };

struct RigidTuple {
  double d1 = 0.0;
  double d2 = 0.0;
  double theta = 0.0;  // (-pi, pi]
  double phi = 0.0;    // (-pi, pi]
  std::pair<int, int> psi{-1, -1};
  PathType type = PathType::Cross;
};

using NodeTriple = std::array<int, 3>;
using RigidSet = std::map<NodeTriple, RigidTuple>;

PathSet enumerate_paths(const SagTopology& g, bool include_backtracking = true);

// Counterclockwise rotation about n_ref carrying unit(vi - vj) onto unit(vk - vj).
// Zero when unit(vk - vj) is parallel to n_ref (within 1e-9).
double signed_planar_angle(const Point3& vi, const Point3& vj, const Point3& vk, const Point3& n_ref);

// Signed angle between outward normals n1 (face of e1) and n2 (face of e2).
double signed_dihedral_angle(const Point3& vi, const Point3& vj, const Point3& vk, const Point3& n1,
                             const Point3& n2, PathType type);

RigidSet compute_rigid_set(const Sag& g, bool include_backtracking = true);
RigidSet compute_rigid_set(const Sag& g, const PathSet& paths);

struct FacePlan {
  std::vector<int> loop;       // node ids, starting with the start edge's tail
  std::vector<Point2> coords;  // same order as loop, counterclockwise about local +z
  double closure_residual = 0.0;
};

// Lays out one face in 2D from its inner tuples: the start edge's head sits at
// the origin and its tail at (-d1, 0).
FacePlan reconstruct_face(const RigidSet& rigid, std::pair<int, int> start_edge, int face);

Polyhedron reconstruct_polyhedron(const RigidSet& rigid, const SagTopology& topology);

bool rigid_sets_equal(const RigidSet& a, const RigidSet& b, double tol);

// Largest per-key deviation (distances relative, angles wrap-aware); +inf when
// key sets or psi pairs differ.
double rigid_set_deviation(const RigidSet& a, const RigidSet& b);

double wrap_angle(double a);  // to (-pi, pi]

// One line per tuple: "i j k d1 d2 theta phi face1 face2", 17 significant digits.
void write_rigid_set(std::ostream& os, const RigidSet& rigid);
RigidSet read_rigid_set(std::istream& is);

}  // namespace polynet
