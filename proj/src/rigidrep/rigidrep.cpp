#include "polynet/rigidrep.hpp"

#include "polynet/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace polynet {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHingeEps = 1e-12;
constexpr double kPlanarEps = 1e-9;

Point3 unit_or_throw(const Point3& v, const char* what) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorCode::Degenerate, what);
  return v / n;
}

void require_unit(const Point3& n) {
  if (!n.allFinite() || std::abs(n.norm() - 1.0) > 1e-6)
    throw Error(ErrorCode::Degenerate, "face normal is not a unit vector");
}

std::vector<Point3> all_face_normals(const Sag& g) {
  const auto& topology = g.topology();
  std::vector<Point3> normals;
  normals.reserve(topology.faces().size());
  for (std::size_t f = 0; f < topology.faces().size(); ++f) {
    const auto loop = topology.face_loop(static_cast<int>(f));
    const Point3 n = newell_vector(g.coords(), loop);
    if (!(n.norm() >= 1e-12))
      throw Error(ErrorCode::DegenerateFace, "face " + std::to_string(f) + " has a vanishing normal");
    normals.push_back(n.normalized());
  }
  return normals;
}

const RigidTuple* find_inner(const RigidSet& rigid, int a, int b, int face, int* next) {
  for (auto it = rigid.lower_bound({a, b, std::numeric_limits<int>::min()});
       it != rigid.end() && it->first[0] == a && it->first[1] == b; ++it) {
    if (it->second.psi.first == face && it->second.psi.second == face) {
      *next = it->first[2];
      return &it->second;
    }
  }
  return nullptr;
}

Point3 rotate_about(const Point3& v, const Point3& axis, double angle) {
  return v * std::cos(angle) + axis.cross(v) * std::sin(angle) + axis * axis.dot(v) * (1.0 - std::cos(angle));
}

}  // namespace

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

PathSet enumerate_paths(const SagTopology& g, bool include_backtracking) {
  PathSet out;
  out.offsets.reserve(static_cast<std::size_t>(g.node_count()) + 1);
  out.offsets.push_back(0);
  for (int i = 0; i < g.node_count(); ++i) {
    for (int e1 : g.out_edges(i)) {
      const int j = g.edge(e1).head;
      for (int e2 : g.out_edges(j)) {
        const int k = g.edge(e2).head;
        if (k == i && !include_backtracking) continue;
        out.paths.push_back({i, j, k, e1, e2});
      }
    }
    out.offsets.push_back(out.paths.size());
  }
  return out;
}

double signed_planar_angle(const Point3& vi, const Point3& vj, const Point3& vk, const Point3& n_ref) {
  const Point3 u1 = unit_or_throw(vi - vj, "zero-length edge in planar angle");
  const Point3 u2 = unit_or_throw(vk - vj, "zero-length edge in planar angle");
  double y = u1.cross(u2).dot(n_ref);
  const double x = u1.dot(u2);
  // u2 along n_ref (a cross path leaving the face at a right angle): the
  // projected angle is 0/0, and rounding noise would pick any value.
  if (std::hypot(x, y) < kPlanarEps) return 0.0;
  // Pins the straight-through case to +pi instead of a noise-chosen -pi.
  if (std::abs(y) < kHingeEps) y = 0.0;
  return wrap_angle(std::atan2(y, x));
}

double signed_dihedral_angle(const Point3& vi, const Point3& vj, const Point3& vk, const Point3& n1,
                             const Point3& n2, PathType type) {
  require_unit(n1);
  require_unit(n2);
  if (type == PathType::Inner) return 0.0;

  const double c = std::clamp(n1.dot(n2), -1.0, 1.0);
  const Point3 hinge = n1.cross(n2);
  if (hinge.norm() < kHingeEps) return c > 0.0 ? 0.0 : kPi;

  const Point3 along = unit_or_throw(vj - vi, "zero-length edge in dihedral angle");
  Point3 w = along;
  if (vk != vi) {
    const Point3 u1 = unit_or_throw(vi - vj, "zero-length edge in dihedral angle");
    const Point3 u2 = unit_or_throw(vk - vj, "zero-length edge in dihedral angle");
    const Point3 turn = u1.cross(u2);
    if (std::abs(hinge.dot(turn)) >= kHingeEps) w = turn;
  }
  const double s = hinge.dot(w) < 0.0 ? -1.0 : 1.0;
  return wrap_angle(s * std::acos(c));
}

RigidSet compute_rigid_set(const Sag& g, bool include_backtracking) {
  return compute_rigid_set(g, enumerate_paths(g.topology(), include_backtracking));
}

RigidSet compute_rigid_set(const Sag& g, const PathSet& paths) {
  const auto normals = all_face_normals(g);
  RigidSet out;
  for (const auto& path : paths.paths) {
    const Point3& vi = g.coord(path.i);
    const Point3& vj = g.coord(path.j);
    const Point3& vk = g.coord(path.k);
    const int f1 = g.topology().edge(path.e1).face;
    const int f2 = g.topology().edge(path.e2).face;
    RigidTuple t;
    t.d1 = (vi - vj).norm();
    t.d2 = (vj - vk).norm();
    if (!(t.d1 > 0.0) || !(t.d2 > 0.0)) throw Error(ErrorCode::Degenerate, "zero-length edge");
    t.psi = {f1, f2};
    t.type = f1 == f2 ? PathType::Inner : PathType::Cross;
    const auto& n1 = normals[static_cast<std::size_t>(f1)];
    t.theta = signed_planar_angle(vi, vj, vk, n1);
    t.phi = signed_dihedral_angle(vi, vj, vk, n1, normals[static_cast<std::size_t>(f2)], t.type);
    out.emplace(NodeTriple{path.i, path.j, path.k}, t);
  }
  return out;
}

FacePlan reconstruct_face(const RigidSet& rigid, std::pair<int, int> start_edge, int face) {
  const auto [start, second] = start_edge;
  int next = -1;
  const RigidTuple* first = find_inner(rigid, start, second, face, &next);
  if (!first)
    throw Error(ErrorCode::IncompleteInput, "no inner tuple for edge " + std::to_string(start) + "->" +
                                                std::to_string(second) + " in face " + std::to_string(face));

  FacePlan plan;
  plan.loop = {start, second};
  plan.coords = {Point2(-first->d1, 0.0), Point2(0.0, 0.0)};
  double perimeter = first->d1;

  int prev = start;
  int cur = second;
  Point2 p_prev = plan.coords[0];
  Point2 p_cur = plan.coords[1];
  bool closed = false;
  for (std::size_t step = 0; step <= rigid.size(); ++step) {
    const RigidTuple* tuple = step == 0 ? first : find_inner(rigid, prev, cur, face, &next);
    if (!tuple)
      throw Error(ErrorCode::IncompleteInput, "no inner tuple continuing " + std::to_string(prev) + "->" +
                                                  std::to_string(cur) + " in face " + std::to_string(face));
    const Point2 u = (p_prev - p_cur).normalized();
    const double c = std::cos(tuple->theta);
    const double s = std::sin(tuple->theta);
    const Point2 p_next = p_cur + tuple->d2 * Point2(c * u.x() - s * u.y(), s * u.x() + c * u.y());

    if (closed) {
      // Second closing step re-places the start edge's head.
      if (next != second)
        throw Error(ErrorCode::InconsistentRigidSet, "face " + std::to_string(face) + " does not close on its start edge");
      plan.closure_residual = std::max(plan.closure_residual, (p_next - plan.coords[1]).norm());
      break;
    }
    if (next == start) {
      plan.closure_residual = (p_next - plan.coords[0]).norm();
      closed = true;
    } else {
      if (std::find(plan.loop.begin(), plan.loop.end(), next) != plan.loop.end())
        throw Error(ErrorCode::InconsistentRigidSet, "face " + std::to_string(face) + " revisits node " + std::to_string(next));
      plan.loop.push_back(next);
      plan.coords.push_back(p_next);
      perimeter += tuple->d2;
    }
    prev = cur;
    cur = next;
    p_prev = p_cur;
    p_cur = p_next;
  }
  if (!closed) throw Error(ErrorCode::InconsistentRigidSet, "face " + std::to_string(face) + " never closes");
  perimeter += (plan.coords.back() - plan.coords.front()).norm();
  if (plan.closure_residual > 1e-6 * perimeter)
    throw Error(ErrorCode::InconsistentRigidSet, "face " + std::to_string(face) + " fails to close (residual " +
                                                     std::to_string(plan.closure_residual) + ")");
  return plan;
}

Polyhedron reconstruct_polyhedron(const RigidSet& rigid, const SagTopology& topology) {
  const std::size_t face_count = topology.faces().size();
  if (face_count == 0) throw Error(ErrorCode::IncompleteInput, "topology has no faces");

  double scale = 0.0;
  for (const auto& [key, t] : rigid) scale = std::max(scale, t.d1);
  const double tol = 1e-6 * scale;

  std::vector<Point3> position(static_cast<std::size_t>(topology.node_count()), Point3::Zero());
  std::vector<bool> placed(position.size(), false);
  std::vector<Point3> normal(face_count, Point3::Zero());
  std::vector<bool> done(face_count, false);

  auto place = [&](const FacePlan& plan, const Point3& origin, const Point3& ex, const Point3& ey, int face) {
    for (std::size_t a = 0; a < plan.loop.size(); ++a) {
      const auto node = static_cast<std::size_t>(plan.loop[a]);
      const Point3 p = origin + plan.coords[a].x() * ex + plan.coords[a].y() * ey;
      if (placed[node]) {
        if ((position[node] - p).norm() > tol)
          throw Error(ErrorCode::InconsistentRigidSet, "node " + std::to_string(node) + " placed inconsistently by face " +
                                                           std::to_string(face));
      } else {
        position[node] = p;
        placed[node] = true;
      }
    }
  };

  const auto& seed_edge = topology.edge(topology.faces().front().edge_ids.front());
  place(reconstruct_face(rigid, {seed_edge.tail, seed_edge.head}, 0), Point3::Zero(), Point3::UnitX(), Point3::UnitY(), 0);
  normal[0] = Point3::UnitZ();
  done[0] = true;

  std::vector<int> queue{0};
  for (std::size_t q = 0; q < queue.size(); ++q) {
    const int f1 = queue[q];
    for (int e : topology.faces()[static_cast<std::size_t>(f1)].edge_ids) {
      const int f2 = topology.edge(topology.opposite_edge(e)).face;
      if (done[static_cast<std::size_t>(f2)]) continue;
      const int i = topology.edge(e).tail;
      const int j = topology.edge(e).head;
      const auto hinge = rigid.find({i, j, i});
      if (hinge == rigid.end())
        throw Error(ErrorCode::IncompleteInput, "missing backtracking tuple (" + std::to_string(i) + "," +
                                                    std::to_string(j) + "," + std::to_string(i) + ")");
      if (hinge->second.psi != std::pair<int, int>{f1, f2})
        throw Error(ErrorCode::InconsistentRigidSet, "backtracking tuple names the wrong faces");

      const Point3& pi = position[static_cast<std::size_t>(i)];
      const Point3& pj = position[static_cast<std::size_t>(j)];
      const Point3 axis = (pj - pi).normalized();
      Point3 n2 = rotate_about(normal[static_cast<std::size_t>(f1)], axis, hinge->second.phi);
      n2 = (n2 - axis * axis.dot(n2)).normalized();

      const FacePlan plan = reconstruct_face(rigid, {j, i}, f2);
      const Point3 ex = -axis;
      const Point3 ey = n2.cross(ex);
      place(plan, pi, ex, ey, f2);
      normal[static_cast<std::size_t>(f2)] = n2;
      done[static_cast<std::size_t>(f2)] = true;
      queue.push_back(f2);
    }
  }
  if (queue.size() != face_count)
    throw Error(ErrorCode::DisconnectedSurface, std::to_string(face_count - queue.size()) + " faces are unreachable");
  for (std::size_t v = 0; v < placed.size(); ++v)
    if (!placed[v]) throw Error(ErrorCode::IncompleteInput, "node " + std::to_string(v) + " lies on no face");

  Polyhedron out;
  out.vertices = std::move(position);
  out.faces.reserve(face_count);
  for (std::size_t f = 0; f < face_count; ++f)
    out.faces.push_back(PolygonFace{topology.face_loop(static_cast<int>(f)), topology.face_attr(static_cast<int>(f))});
  return out;
}

double rigid_set_deviation(const RigidSet& a, const RigidSet& b) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (a.size() != b.size()) return inf;
  double worst = 0.0;
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return inf;
    const auto& x = ia->second;
    const auto& y = ib->second;
    if (x.psi != y.psi || x.type != y.type) return inf;
    worst = std::max(worst, std::abs(x.d1 - y.d1) / std::max(std::abs(x.d1), 1.0));
    worst = std::max(worst, std::abs(x.d2 - y.d2) / std::max(std::abs(x.d2), 1.0));
    worst = std::max(worst, std::abs(wrap_angle(x.theta - y.theta)));
    worst = std::max(worst, std::abs(wrap_angle(x.phi - y.phi)));
  }
  return worst;
}

bool rigid_sets_equal(const RigidSet& a, const RigidSet& b, double tol) { return rigid_set_deviation(a, b) <= tol; }

}  // namespace polynet
