#include "polynet/error.hpp"
#include "polynet/geom.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_set>

namespace polynet {

namespace {

constexpr double kDegenerateNewell = 1e-12;

struct EdgeUse {
  int forward = 0;  // traversals low -> high
  int backward = 0;
  int forward_face = -1;
  int backward_face = -1;
};

}  // namespace

std::string_view to_string(IssueCode code) {
  switch (code) {
    case IssueCode::ShortLoop: return "loop with fewer than 3 vertices";
    case IssueCode::RepeatedVertex: return "repeated vertex in loop";
    case IssueCode::ZeroLengthEdge: return "zero-length edge";
    case IssueCode::DegenerateFace: return "degenerate face";
    case IssueCode::NonCoplanarFace: return "non-coplanar face";
    case IssueCode::UnpairedEdge: return "unpaired directed edge";
    case IssueCode::DuplicateDirectedEdge: return "duplicate directed edge";
    case IssueCode::UnderReferencedVertex: return "vertex referenced by fewer than 2 faces";
    case IssueCode::InvertedOrientation: return "non-positive enclosed volume";
    case IssueCode::InwardNormal: return "inward-facing normal";
    case IssueCode::AttrDimension: return "attribute dimension mismatch";
  }
  return "issue";
}

std::size_t ValidationReport::count(IssueCode code) const {
  return static_cast<std::size_t>(std::count_if(
      issues.begin(), issues.end(), [code](const ValidationIssue& i) { return i.code == code; }));
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& issue : issues) {
    os << to_string(issue.code);
    if (issue.face >= 0) os << " face=" << issue.face;
    if (issue.edge.first >= 0) os << " edge=" << issue.edge.first << "-" << issue.edge.second;
    if (issue.vertex >= 0) os << " vertex=" << issue.vertex;
    if (issue.deviation != 0.0) os << " deviation=" << issue.deviation;
    os << "; ";
  }
  return os.str();
}

double Polyhedron::diameter() const {
  if (vertices.empty()) return 0.0;
  Point3 lo = vertices.front();
  Point3 hi = vertices.front();
  for (const auto& v : vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return (hi - lo).norm();
}

Point3 Polyhedron::centroid() const {
  Point3 c = Point3::Zero();
  for (const auto& v : vertices) c += v;
  return vertices.empty() ? c : Point3(c / static_cast<double>(vertices.size()));
}

Point3 newell_vector(std::span<const Point3> vertices, std::span<const int> loop) {
  Point3 n = Point3::Zero();
  const std::size_t count = loop.size();
  for (std::size_t a = 0; a < count; ++a) {
    const Point3& cur = vertices[static_cast<std::size_t>(loop[a])];
    const Point3& nxt = vertices[static_cast<std::size_t>(loop[(a + 1) % count])];
    n.x() += (cur.y() - nxt.y()) * (cur.z() + nxt.z());
    n.y() += (cur.z() - nxt.z()) * (cur.x() + nxt.x());
    n.z() += (cur.x() - nxt.x()) * (cur.y() + nxt.y());
  }
  return n;
}

Point3 face_normal(const Polyhedron& p, int face_index) {
  if (face_index < 0 || static_cast<std::size_t>(face_index) >= p.faces.size())
    throw Error(ErrorCode::Structural, "face index " + std::to_string(face_index) + " out of range");
  const auto& loop = p.faces[static_cast<std::size_t>(face_index)].loop;
  const Point3 n = newell_vector(p.vertices, loop);
  const double norm = n.norm();
  if (!(norm >= kDegenerateNewell))
    throw Error(ErrorCode::DegenerateFace, "face " + std::to_string(face_index) + " has a vanishing normal");
  return n / norm;
}

double signed_volume(const Polyhedron& p) {
  // Fan-triangulate each face and sum the signed tetrahedra against the origin.
  double six_volume = 0.0;
  for (const auto& face : p.faces) {
    if (face.loop.size() < 3) continue;
    const Point3& a = p.vertices[static_cast<std::size_t>(face.loop[0])];
    for (std::size_t t = 1; t + 1 < face.loop.size(); ++t) {
      const Point3& b = p.vertices[static_cast<std::size_t>(face.loop[t])];
      const Point3& c = p.vertices[static_cast<std::size_t>(face.loop[t + 1])];
      six_volume += a.dot(b.cross(c));
    }
  }
  return six_volume / 6.0;
}

double surface_area(const Polyhedron& p) {
  double area = 0.0;
  for (const auto& face : p.faces) area += 0.5 * newell_vector(p.vertices, face.loop).norm();
  return area;
}

ValidationReport validate_polyhedron(const Polyhedron& p, double coplanarity_tol) {
  const int vertex_count = static_cast<int>(p.vertices.size());
  for (std::size_t f = 0; f < p.faces.size(); ++f) {
    for (int idx : p.faces[f].loop) {
      if (idx < 0 || idx >= vertex_count)
        throw Error(ErrorCode::Structural, "faces[" + std::to_string(f) + "] references vertex " +
                                               std::to_string(idx) + " of " + std::to_string(vertex_count));
    }
  }
  for (std::size_t v = 0; v < p.vertices.size(); ++v) {
    if (!p.vertices[v].allFinite())
      throw Error(ErrorCode::Structural, "vertex " + std::to_string(v) + " is not finite");
  }

  ValidationReport report;
  const double diameter = p.diameter();
  const double length_floor = coplanarity_tol * diameter;
  const std::size_t attr_dim = p.attr_dim();

  std::map<std::pair<int, int>, EdgeUse> edges;
  std::vector<int> face_refs(p.vertices.size(), 0);

  for (std::size_t fi = 0; fi < p.faces.size(); ++fi) {
    const auto& face = p.faces[fi];
    const int f = static_cast<int>(fi);
    const auto& loop = face.loop;

    if (face.attr.size() != attr_dim)
      report.issues.push_back({IssueCode::AttrDimension, f, {-1, -1}, -1,
                               static_cast<double>(face.attr.size())});
    if (loop.size() < 3) {
      report.issues.push_back({IssueCode::ShortLoop, f, {-1, -1}, -1, static_cast<double>(loop.size())});
      continue;
    }

    std::unordered_set<int> seen;
    for (int idx : loop) {
      if (!seen.insert(idx).second) report.issues.push_back({IssueCode::RepeatedVertex, f, {-1, -1}, idx, 0.0});
    }
    for (int idx : seen) ++face_refs[static_cast<std::size_t>(idx)];

    for (std::size_t a = 0; a < loop.size(); ++a) {
      const int tail = loop[a];
      const int head = loop[(a + 1) % loop.size()];
      const double length =
          (p.vertices[static_cast<std::size_t>(head)] - p.vertices[static_cast<std::size_t>(tail)]).norm();
      if (length <= length_floor)
        report.issues.push_back({IssueCode::ZeroLengthEdge, f, {tail, head}, -1, length});
      if (tail == head) continue;
      auto& use = edges[{std::min(tail, head), std::max(tail, head)}];
      if (tail < head) {
        ++use.forward;
        use.forward_face = f;
      } else {
        ++use.backward;
        use.backward_face = f;
      }
    }

    const Point3 newell = newell_vector(p.vertices, loop);
    const double norm = newell.norm();
    if (!(norm >= kDegenerateNewell)) {
      report.issues.push_back({IssueCode::DegenerateFace, f, {-1, -1}, -1, norm});
      continue;
    }
    const Point3 normal = newell / norm;
    Point3 centre = Point3::Zero();
    for (int idx : loop) centre += p.vertices[static_cast<std::size_t>(idx)];
    centre /= static_cast<double>(loop.size());
    double max_offset = 0.0;
    for (int idx : loop)
      max_offset = std::max(max_offset, std::abs(normal.dot(p.vertices[static_cast<std::size_t>(idx)] - centre)));
    if (max_offset > coplanarity_tol * diameter)
      report.issues.push_back({IssueCode::NonCoplanarFace, f, {-1, -1}, -1, max_offset});

    if (normal.dot(centre - p.centroid()) < 0.0)
      report.warnings.push_back({IssueCode::InwardNormal, f, {-1, -1}, -1, normal.dot(centre - p.centroid())});
  }

  for (const auto& [key, use] : edges) {
    if (use.forward > 1 || use.backward > 1)
      report.issues.push_back({IssueCode::DuplicateDirectedEdge, -1, key, -1,
                               static_cast<double>(std::max(use.forward, use.backward))});
    if (use.forward != 1 || use.backward != 1) {
      report.issues.push_back({IssueCode::UnpairedEdge, -1, key, -1, 0.0});
    } else if (use.forward_face == use.backward_face) {
      report.issues.push_back({IssueCode::UnpairedEdge, use.forward_face, key, -1, 0.0});
    }
  }

  for (std::size_t v = 0; v < face_refs.size(); ++v) {
    if (face_refs[v] < 2)
      report.issues.push_back(
          {IssueCode::UnderReferencedVertex, -1, {-1, -1}, static_cast<int>(v), static_cast<double>(face_refs[v])});
  }

  if (report.issues.empty()) {
    const double volume = signed_volume(p);
    if (!(volume > 0.0)) report.issues.push_back({IssueCode::InvertedOrientation, -1, {-1, -1}, -1, volume});
  }

  report.ok = report.issues.empty();
  return report;
}

}  // namespace polynet
