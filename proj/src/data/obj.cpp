#include "polynet/data.hpp"
#include "polynet/error.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace polynet::data {

namespace {

std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

std::string where(int line_no) { return "line " + std::to_string(line_no) + ": "; }

}  // namespace

MaterialTable parse_mtl(std::istream& is) {
  MaterialTable table;
  std::string line;
  std::string current;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ss(strip_comment(line));
    std::string key;
    if (!(ss >> key)) continue;
    if (key == "newmtl") {
      if (!(ss >> current)) throw Error(ErrorCode::Schema, where(line_no) + "newmtl without a name");
      table[current] = AttrVector(3, 0.0);
    } else if (key == "Kd") {
      if (current.empty()) throw Error(ErrorCode::Schema, where(line_no) + "Kd before newmtl");
      AttrVector kd(3);
      if (!(ss >> kd[0] >> kd[1] >> kd[2])) throw Error(ErrorCode::Schema, where(line_no) + "Kd needs three reals");
      table[current] = kd;
    }
  }
  return table;
}

MaterialTable load_mtl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return parse_mtl(in);
}

TriangleMesh parse_obj(std::istream& is, const MaterialTable& materials) {
  const std::size_t attr_dim = materials.empty() ? 0 : materials.begin()->second.size();
  TriangleMesh mesh;
  AttrVector current(attr_dim, 0.0);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ss(strip_comment(line));
    std::string key;
    if (!(ss >> key)) continue;
    if (key == "v") {
      double x = 0, y = 0, z = 0;
      if (!(ss >> x >> y >> z)) throw Error(ErrorCode::Schema, where(line_no) + "v needs three reals");
      mesh.vertices.emplace_back(x, y, z);
    } else if (key == "usemtl") {
      std::string name;
      ss >> name;
      const auto it = materials.find(name);
      if (it == materials.end()) throw Error(ErrorCode::Schema, where(line_no) + "unknown material '" + name + "'");
      current = it->second;
    } else if (key == "f") {
      std::vector<int> loop;
      std::string token;
      const auto n = static_cast<long>(mesh.vertices.size());
      while (ss >> token) {
        long idx = 0;
        try {
          idx = std::stol(token.substr(0, token.find('/')));
        } catch (const std::exception&) {
          throw Error(ErrorCode::Schema, where(line_no) + "bad face index '" + token + "'");
        }
        const long resolved = idx < 0 ? n + idx : idx - 1;
        if (idx == 0 || resolved < 0 || resolved >= n)
          throw Error(ErrorCode::Structural, where(line_no) + "vertex index " + std::to_string(idx) +
                                                 " out of range (" + std::to_string(n) + " vertices)");
        loop.push_back(static_cast<int>(resolved));
      }
      if (loop.size() < 3) throw Error(ErrorCode::Schema, where(line_no) + "face needs at least 3 vertices");
      for (std::size_t a = 1; a + 1 < loop.size(); ++a) {
        mesh.triangles.push_back({loop[0], loop[a], loop[a + 1]});
        mesh.triangle_attrs.push_back(current);
      }
    }
  }
  return mesh;
}

TriangleMesh import_obj(const std::filesystem::path& path, const MaterialTable& materials) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  TriangleMesh mesh = parse_obj(in, materials);
  check_closed_manifold(mesh);
  return mesh;
}

void check_closed_manifold(const TriangleMesh& mesh) {
  if (mesh.triangles.empty()) throw Error(ErrorCode::NonManifold, "mesh has no triangles");
  std::map<std::pair<int, int>, int> directed;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int a = 0; a < 3; ++a) {
      const int u = tri[static_cast<std::size_t>(a)];
      const int v = tri[static_cast<std::size_t>((a + 1) % 3)];
      if (u == v) throw Error(ErrorCode::NonManifold, "triangle " + std::to_string(t) + " repeats a vertex");
      if (++directed[{u, v}] > 1)
        throw Error(ErrorCode::NonManifold, "directed edge " + std::to_string(u) + "->" + std::to_string(v) +
                                                " used twice (inconsistent orientation or non-manifold)");
    }
  }
  for (const auto& [edge, count] : directed) {
    (void)count;
    if (!directed.contains({edge.second, edge.first}))
      throw Error(ErrorCode::NonManifold,
                  "open boundary at edge " + std::to_string(edge.first) + "->" + std::to_string(edge.second));
  }
}

TriangleMesh triangulate(const Polyhedron& p) {
  TriangleMesh mesh;
  mesh.vertices = p.vertices;
  for (const auto& face : p.faces) {
    for (std::size_t a = 1; a + 1 < face.loop.size(); ++a) {
      mesh.triangles.push_back({face.loop[0], face.loop[a], face.loop[a + 1]});
      mesh.triangle_attrs.push_back(face.attr);
    }
  }
  return mesh;
}

TriangleMesh make_icosphere(int subdivisions, const AttrVector& attr) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh mesh;
  mesh.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                   {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : mesh.vertices) v.normalize();
  mesh.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                    {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                    {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
      mesh.vertices.push_back((mesh.vertices[static_cast<std::size_t>(a)] + mesh.vertices[static_cast<std::size_t>(b)])
                                  .normalized());
      const int id = static_cast<int>(mesh.vertices.size()) - 1;
      midpoint[key] = id;
      return id;
    };
    std::vector<std::array<int, 3>> next;
    for (const auto& tri : mesh.triangles) {
      const int ab = mid(tri[0], tri[1]);
      const int bc = mid(tri[1], tri[2]);
      const int ca = mid(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    mesh.triangles = std::move(next);
  }

  for (auto& tri : mesh.triangles) {
    const Point3& a = mesh.vertices[static_cast<std::size_t>(tri[0])];
    const Point3& b = mesh.vertices[static_cast<std::size_t>(tri[1])];
    const Point3& c = mesh.vertices[static_cast<std::size_t>(tri[2])];
    if ((b - a).cross(c - a).dot(a + b + c) < 0) std::swap(tri[1], tri[2]);
  }
  mesh.triangle_attrs.assign(mesh.triangles.size(), attr);
  return mesh;
}

}  // namespace polynet::data
