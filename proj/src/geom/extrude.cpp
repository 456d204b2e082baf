#include "polynet/error.hpp"
#include "polynet/geom.hpp"

#include <cmath>
#include <numbers>

namespace polynet {

namespace {

double cross2(const Point2& a, const Point2& b) { return a.x() * b.y() - a.y() * b.x(); }

int orientation(const Point2& a, const Point2& b, const Point2& c) {
  const double v = cross2(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

bool on_segment(const Point2& a, const Point2& b, const Point2& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) && std::min(a.y(), b.y()) <= p.y() &&
         p.y() <= std::max(a.y(), b.y());
}

bool segments_intersect(const Point2& p1, const Point2& p2, const Point2& q1, const Point2& q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

}  // namespace

double signed_area(std::span<const Point2> polygon) {
  double twice = 0.0;
  for (std::size_t a = 0; a < polygon.size(); ++a) twice += cross2(polygon[a], polygon[(a + 1) % polygon.size()]);
  return 0.5 * twice;
}

bool is_simple_polygon(std::span<const Point2> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  for (std::size_t a = 0; a < n; ++a) {
    if ((polygon[a] - polygon[(a + 1) % n]).norm() == 0.0) return false;
    for (std::size_t b = a + 1; b < n; ++b) {
      const bool adjacent = b == a + 1 || (a == 0 && b == n - 1);
      if (adjacent) {
        // Adjacent edges may only share their common endpoint: reject folds back.
        const std::size_t shared = (b == a + 1) ? b : a;
        const Point2& s = polygon[shared];
        const Point2& x = polygon[(shared + n - 1) % n];
        const Point2& y = polygon[(shared + 1) % n];
        if (orientation(x, s, y) == 0 && (x - s).dot(y - s) > 0.0) return false;
        continue;
      }
      if (segments_intersect(polygon[a], polygon[(a + 1) % n], polygon[b], polygon[(b + 1) % n])) return false;
    }
  }
  return true;
}

const AttrVector& ColorScheme::color(FaceRole role) const {
  switch (role) {
    case FaceRole::Front: return front;
    case FaceRole::Back: return back;
    case FaceRole::Side: return side;
    case FaceRole::BottomSide: return bottom_side;
  }
  return side;
}

ColorScheme ColorScheme::digits() {
  ColorScheme s;
  s.front = {1.0, 0.0, 0.0};
  s.back = {0.0, 0.0, 1.0};
  s.side = {0.0, 1.0, 0.0};
  s.bottom_side = {0.5, 0.0, 0.5};
  return s;
}

ColorScheme ColorScheme::none() { return ColorScheme{}; }

std::vector<FaceRole> extrusion_face_roles(const Polyhedron& extruded, double bottom_angle_deg) {
  std::vector<FaceRole> roles;
  roles.reserve(extruded.faces.size());
  const double threshold = std::cos(bottom_angle_deg * std::numbers::pi / 180.0);
  for (std::size_t f = 0; f < extruded.faces.size(); ++f) {
    if (f == 0) {
      roles.push_back(FaceRole::Front);
    } else if (f == 1) {
      roles.push_back(FaceRole::Back);
    } else {
      const Point3 n = face_normal(extruded, static_cast<int>(f));
      roles.push_back(-n.y() >= threshold ? FaceRole::BottomSide : FaceRole::Side);
    }
  }
  return roles;
}

Polyhedron extrude_polygon(std::span<const Point2> polygon, double height, const ColorScheme& scheme) {
  const std::size_t n = polygon.size();
  if (n < 3) throw Error(ErrorCode::InvalidPolygon, "polygon needs at least 3 vertices");
  if (!(height > 0.0) || !std::isfinite(height))
    throw Error(ErrorCode::InvalidPolygon, "extrusion height must be positive");
  for (const auto& v : polygon)
    if (!v.allFinite()) throw Error(ErrorCode::InvalidPolygon, "non-finite polygon vertex");
  if (!is_simple_polygon(polygon)) throw Error(ErrorCode::InvalidPolygon, "polygon self-intersects");
  if (!(signed_area(polygon) > 0.0)) throw Error(ErrorCode::InvalidPolygon, "polygon is not counterclockwise");

  Polyhedron p;
  p.vertices.reserve(2 * n);
  for (const auto& v : polygon) p.vertices.emplace_back(v.x(), v.y(), 0.0);
  for (const auto& v : polygon) p.vertices.emplace_back(v.x(), v.y(), height);

  const int count = static_cast<int>(n);
  PolygonFace front;
  PolygonFace back;
  for (int a = 0; a < count; ++a) {
    front.loop.push_back(count + a);
    back.loop.push_back(count - 1 - a);
  }
  p.faces.push_back(std::move(front));
  p.faces.push_back(std::move(back));
  for (int a = 0; a < count; ++a) {
    const int b = (a + 1) % count;
    p.faces.push_back(PolygonFace{{a, b, count + b, count + a}, {}});
  }

  const auto roles = extrusion_face_roles(p, scheme.bottom_angle_deg);
  for (std::size_t f = 0; f < p.faces.size(); ++f) p.faces[f].attr = scheme.color(roles[f]);
  return p;
}

}  // namespace polynet
