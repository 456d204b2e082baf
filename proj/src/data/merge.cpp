#include "polynet/data.hpp"
#include "polynet/error.hpp"

#include <algorithm>
#include <numeric>

namespace polynet::data {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<int> rank_;
};

Point3 unit_normal(const TriangleMesh& m, const std::array<int, 3>& tri) {
  const Point3& a = m.vertices[static_cast<std::size_t>(tri[0])];
  const Point3& b = m.vertices[static_cast<std::size_t>(tri[1])];
  const Point3& c = m.vertices[static_cast<std::size_t>(tri[2])];
  const Point3 n = (b - a).cross(c - a);
  const double len = n.norm();
  return len > 0 ? Point3(n / len) : Point3::Zero();
}

bool collinear_through(const Point3& prev, const Point3& v, const Point3& next) {
  const Point3 a = v - prev;
  const Point3 b = next - v;
  const double scale = a.norm() * b.norm();
  return a.dot(b) > 0 && a.cross(b).norm() < 1e-9 * scale;
}

}  // namespace

MergeResult merge_coplanar_faces(const TriangleMesh& mesh, const MergeOptions& options) {
  check_closed_manifold(mesh);
  const std::size_t tri_count = mesh.triangles.size();

  std::vector<Point3> normals(tri_count);
  for (std::size_t t = 0; t < tri_count; ++t) normals[t] = unit_normal(mesh, mesh.triangles[t]);

  // directed edge -> owning triangle
  std::map<std::pair<int, int>, std::size_t> owner;
  for (std::size_t t = 0; t < tri_count; ++t)
    for (int a = 0; a < 3; ++a)
      owner[{mesh.triangles[t][static_cast<std::size_t>(a)], mesh.triangles[t][static_cast<std::size_t>((a + 1) % 3)]}] = t;

  DisjointSets sets(tri_count);
  for (const auto& [edge, t] : owner) {
    if (edge.first > edge.second) continue;
    const std::size_t u = owner.at({edge.second, edge.first});
    if (normals[t].dot(normals[u]) >= 1.0 - options.normal_tol && mesh.triangle_attrs[t] == mesh.triangle_attrs[u])
      sets.unite(t, u);
  }

  // Regions in order of their first triangle.
  std::map<std::size_t, std::size_t> region_of_root;
  std::vector<std::size_t> region(tri_count);
  for (std::size_t t = 0; t < tri_count; ++t) {
    const auto root = sets.find(t);
    const auto [it, inserted] = region_of_root.emplace(root, region_of_root.size());
    (void)inserted;
    region[t] = it->second;
  }
  const std::size_t region_count = region_of_root.size();
  if (region_count > static_cast<std::size_t>(options.max_faces))
    return {std::nullopt, "residual faces: " + std::to_string(region_count) + " > " + std::to_string(options.max_faces)};

  // Boundary edges per region: directed edges whose twin lies in another region.
  std::vector<std::map<int, int>> next_of(region_count);
  std::vector<std::size_t> boundary_size(region_count, 0);
  for (const auto& [edge, t] : owner) {
    if (region[owner.at({edge.second, edge.first})] == region[t]) continue;
    auto& next = next_of[region[t]];
    if (!next.emplace(edge.first, edge.second).second)
      throw Error(ErrorCode::Structural, "region " + std::to_string(region[t]) + " touches itself at vertex " +
                                             std::to_string(edge.first) + "; boundary cannot be chained");
    ++boundary_size[region[t]];
  }

  std::vector<std::vector<int>> loops(region_count);
  for (std::size_t r = 0; r < region_count; ++r) {
    const auto& next = next_of[r];
    if (next.empty()) throw Error(ErrorCode::Structural, "region " + std::to_string(r) + " has no boundary");
    const int start = next.begin()->first;
    int v = start;
    do {
      loops[r].push_back(v);
      const auto it = next.find(v);
      if (it == next.end()) throw Error(ErrorCode::Structural, "boundary of region " + std::to_string(r) + " is open");
      v = it->second;
    } while (v != start && loops[r].size() <= boundary_size[r]);
    if (loops[r].size() != boundary_size[r])
      return {std::nullopt, "face " + std::to_string(r) + " has a hole (more than one boundary loop)"};
  }

  // Drop straight-through boundary vertices shared by exactly two regions.
  std::map<int, int> regions_at_vertex;
  for (const auto& loop : loops)
    for (int v : loop) ++regions_at_vertex[v];
  for (auto& loop : loops) {
    std::vector<int> kept;
    const std::size_t n = loop.size();
    for (std::size_t a = 0; a < n; ++a) {
      const int v = loop[a];
      const Point3& prev = mesh.vertices[static_cast<std::size_t>(loop[(a + n - 1) % n])];
      const Point3& next = mesh.vertices[static_cast<std::size_t>(loop[(a + 1) % n])];
      if (regions_at_vertex[v] == 2 && collinear_through(prev, mesh.vertices[static_cast<std::size_t>(v)], next)) continue;
      kept.push_back(v);
    }
    loop = std::move(kept);
  }

  // Compact vertices, keeping original order.
  std::vector<int> remap(mesh.vertices.size(), -1);
  for (const auto& loop : loops)
    for (int v : loop) remap[static_cast<std::size_t>(v)] = 0;
  Polyhedron out;
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (remap[v] < 0) continue;
    remap[v] = static_cast<int>(out.vertices.size());
    out.vertices.push_back(mesh.vertices[v]);
  }
  std::vector<std::size_t> first_triangle(region_count, tri_count);
  for (std::size_t t = 0; t < tri_count; ++t) first_triangle[region[t]] = std::min(first_triangle[region[t]], t);
  for (std::size_t r = 0; r < region_count; ++r) {
    PolygonFace face;
    for (int v : loops[r]) face.loop.push_back(remap[static_cast<std::size_t>(v)]);
    face.attr = mesh.triangle_attrs[first_triangle[r]];
    out.faces.push_back(std::move(face));
  }

  const auto report = validate_polyhedron(out);
  if (!report.ok) return {std::nullopt, "merged solid is invalid: " + report.summary()};
  return {std::move(out), {}};
}

}  // namespace polynet::data
