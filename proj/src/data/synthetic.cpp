#include "polynet/data.hpp"
#include "polynet/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace polynet::data {

namespace {

Polyhedron make(std::vector<Point3> vertices, std::vector<std::vector<int>> loops, const AttrVector& attr) {
  Polyhedron p;
  p.vertices = std::move(vertices);
  for (auto& loop : loops) p.faces.push_back(PolygonFace{std::move(loop), attr});
  orient_outward_convex(p);
  return p;
}

const char* kind_name(SolidKind k) {
  switch (k) {
    case SolidKind::Tetrahedron: return "tetrahedron";
    case SolidKind::Cube: return "cube";
    case SolidKind::Prism: return "prism";
    case SolidKind::Pyramid: return "pyramid";
  }
  return "solid";
}

}  // namespace

void orient_outward_convex(Polyhedron& p) {
  const Point3 center = p.centroid();
  for (auto& face : p.faces) {
    const Point3 n = newell_vector(p.vertices, face.loop);
    Point3 c = Point3::Zero();
    for (int v : face.loop) c += p.vertices[static_cast<std::size_t>(v)];
    c /= static_cast<double>(face.loop.size());
    if (n.dot(c - center) < 0) std::reverse(face.loop.begin(), face.loop.end());
  }
}

Polyhedron unit_cube(const AttrVector& attr) {
  return make({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}},
              {{0, 3, 2, 1}, {4, 5, 6, 7}, {0, 1, 5, 4}, {1, 2, 6, 5}, {2, 3, 7, 6}, {3, 0, 4, 7}}, attr);
}

Polyhedron regular_tetrahedron(const AttrVector& attr) {
  const double s = 1.0 / std::sqrt(8.0);  // unit edge length
  return make({{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}}, {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}}, attr);
}

Polyhedron triangular_prism(const AttrVector& attr) {
  const double h = std::sqrt(3.0) / 2.0;
  return make({{0, 0, 0}, {1, 0, 0}, {0.5, h, 0}, {0, 0, 1}, {1, 0, 1}, {0.5, h, 1}},
              {{0, 2, 1}, {3, 4, 5}, {0, 1, 4, 3}, {1, 2, 5, 4}, {2, 0, 3, 5}}, attr);
}

Polyhedron square_pyramid(const AttrVector& attr) {
  return make({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0.5, 0.5, 0.8}},
              {{0, 3, 2, 1}, {0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}}, attr);
}

Polyhedron canonical_solid(SolidKind kind, const AttrVector& attr) {
  switch (kind) {
    case SolidKind::Tetrahedron: return regular_tetrahedron(attr);
    case SolidKind::Cube: return unit_cube(attr);
    case SolidKind::Prism: return triangular_prism(attr);
    case SolidKind::Pyramid: return square_pyramid(attr);
  }
  throw Error(ErrorCode::Config, "unknown solid kind");
}

Polyhedron jittered_solid(SolidKind kind, std::mt19937_64& rng, double jitter, const AttrVector& attr) {
  Polyhedron p = canonical_solid(kind, attr);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  Eigen::Matrix3d a;
  do {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) a(r, c) = (r == c ? 1.0 : 0.0) + jitter * u(rng);
  } while (a.determinant() < 0.25);

  const Point3 center = p.centroid();
  for (auto& v : p.vertices) v = a * (v - center);

  // Vertices whose every face is a triangle can move freely.
  std::vector<bool> free(p.vertices.size(), true);
  for (const auto& face : p.faces)
    if (face.loop.size() > 3)
      for (int v : face.loop) free[static_cast<std::size_t>(v)] = false;
  for (std::size_t v = 0; v < p.vertices.size(); ++v) {
    const Point3 d(u(rng), u(rng), u(rng));
    if (free[v]) p.vertices[v] += 0.5 * jitter * d;
  }
  orient_outward_convex(p);
  return p;
}

std::vector<Point2> random_simple_polygon(std::mt19937_64& rng, int vertex_count) {
  if (vertex_count < 3) throw Error(ErrorCode::InvalidPolygon, "polygon needs at least 3 vertices");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point2> out;
  out.reserve(static_cast<std::size_t>(vertex_count));
  for (int i = 0; i < vertex_count; ++i) {
    const double angle = 2.0 * std::numbers::pi * (i + 0.1 + 0.8 * u(rng)) / vertex_count;
    const double radius = 0.5 + 0.5 * u(rng);
    out.emplace_back(radius * std::cos(angle), radius * std::sin(angle));
  }
  return out;
}

Polyhedron random_test_solid(std::mt19937_64& rng, std::size_t index, double jitter, const AttrVector& attr) {
  constexpr std::array<SolidKind, 4> kinds{SolidKind::Tetrahedron, SolidKind::Cube, SolidKind::Prism,
                                           SolidKind::Pyramid};
  if (index % 5 < 4) return jittered_solid(kinds[index % 5], rng, jitter, attr);
  std::uniform_int_distribution<int> count(3, 9);
  std::uniform_real_distribution<double> height(0.3, 1.5);
  const auto polygon = random_simple_polygon(rng, count(rng));
  ColorScheme scheme;
  scheme.front = scheme.back = scheme.side = scheme.bottom_side = attr;
  return extrude_polygon(polygon, height(rng), scheme);
}

std::vector<PolyhedronRecord> synthetic_dataset(const SyntheticOptions& options) {
  if (options.kinds.empty() || options.per_class < 1)
    throw Error(ErrorCode::Config, "synthetic dataset needs at least one kind and one sample per class");
  std::vector<PolyhedronRecord> out;
  std::uint64_t index = 0;
  for (std::size_t k = 0; k < options.kinds.size(); ++k) {
    for (int i = 0; i < options.per_class; ++i, ++index) {
      std::mt19937_64 rng(derive_seed(options.seed, index));
      PolyhedronRecord record;
      record.polyhedron = jittered_solid(options.kinds[k], rng, options.jitter, options.attr);
      if (options.rotate)
        record.polyhedron = apply_rigid_transform(record.polyhedron, sample_random_rotation(rng()));
      record.label = static_cast<int>(k);
      record.id = std::string(kind_name(options.kinds[k])) + "-" + std::to_string(i);
      out.push_back(std::move(record));
    }
  }
  return out;
}

}  // namespace polynet::data
