#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace polynet {

using Point3 = Eigen::Vector3d;
using Point2 = Eigen::Vector2d;
using AttrVector = std::vector<double>;

struct PolygonFace {
  std::vector<int> loop;  // counterclockwise seen from outside
  AttrVector attr;
};

struct Polyhedron {
  std::vector<Point3> vertices;
  std::vector<PolygonFace> faces;

  // Attribute dimension of the first face (0 for a face-less solid).
  std::size_t attr_dim() const { return faces.empty() ? 0 : faces.front().attr.size(); }
  double diameter() const;  // bounding-box diagonal
  Point3 centroid() const;  // vertex average
};

class RigidTransform {
 public:
  RigidTransform() = default;
  // Throws InvalidTransform unless rotation is orthonormal with det +1 (1e-12).
  RigidTransform(const Eigen::Matrix3d& rotation, const Point3& translation);

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Point3& translation() const { return translation_; }

  Point3 apply(const Point3& p) const { return rotation_ * p + translation_; }
  // (this ∘ first): apply `first`, then this.
  RigidTransform after(const RigidTransform& first) const;

 private:
  Eigen::Matrix3d rotation_ = Eigen::Matrix3d::Identity();
  Point3 translation_ = Point3::Zero();
};

enum class IssueCode {
  ShortLoop,
  RepeatedVertex,
  ZeroLengthEdge,
  DegenerateFace,
  NonCoplanarFace,
  UnpairedEdge,
  DuplicateDirectedEdge,
  UnderReferencedVertex,
  InvertedOrientation,
  InwardNormal,
  AttrDimension,
};

std::string_view to_string(IssueCode code);

struct ValidationIssue {
  IssueCode code;
  int face = -1;
  std::pair<int, int> edge{-1, -1};
  int vertex = -1;
  double deviation = 0.0;
};

struct ValidationReport {
  bool ok = true;
  std::vector<ValidationIssue> issues;
  // Inward-pointing face normals relative to the solid centroid. Only
  // meaningful on convex solids, so these never affect `ok`.
  std::vector<ValidationIssue> warnings;

  std::size_t count(IssueCode code) const;
  std::string summary() const;
};

inline constexpr double kDefaultCoplanarityTol = 1e-6;

// Throws Structural on out-of-range indices; every other problem is reported.
ValidationReport validate_polyhedron(const Polyhedron& p,
                                     double coplanarity_tol = kDefaultCoplanarityTol);

// Newell normal (not normalized); its norm is twice the polygon area.
Point3 newell_vector(std::span<const Point3> vertices, std::span<const int> loop);
Point3 face_normal(const Polyhedron& p, int face_index);
double signed_volume(const Polyhedron& p);
double surface_area(const Polyhedron& p);

Polyhedron apply_rigid_transform(const Polyhedron& p, const RigidTransform& t);

// Uniform on SO(3): normalized quaternion from four standard normals.
RigidTransform sample_random_rotation(std::uint64_t seed);

enum class FaceRole { Front, Back, Side, BottomSide };

struct ColorScheme {
  AttrVector front;
  AttrVector back;
  AttrVector side;
  AttrVector bottom_side;
  // Side faces whose outward normal is within this angle of -y get bottom_side.
  double bottom_angle_deg = 22.5;

  std::size_t dim() const { return front.size(); }
  const AttrVector& color(FaceRole role) const;

  // purple bottom, red front, green sides, blue back
  static ColorScheme digits();
  static ColorScheme none();
};

// Front cap at z=height keeps the input order, back cap at z=0 is reversed,
// side quad i is (b_i, b_{i+1}, t_{i+1}, t_i). Throws InvalidPolygon.
Polyhedron extrude_polygon(std::span<const Point2> polygon, double height,
                           const ColorScheme& scheme);

// Role of each face of an extrude_polygon result, evaluated before any rotation.
std::vector<FaceRole> extrusion_face_roles(const Polyhedron& extruded, double bottom_angle_deg);

bool is_simple_polygon(std::span<const Point2> polygon);
double signed_area(std::span<const Point2> polygon);

struct Alignment {
  RigidTransform transform;  // maps a onto b
  double rmsd = 0.0;
};

// Proper-rotation Kabsch: reflections are never returned.
Alignment kabsch_align(std::span<const Point3> a, std::span<const Point3> b);

}  // namespace polynet
