#include "polynet/sag.hpp"

#include "support.hpp"

using namespace polynet;
using test::require_error;
using test::same_cycle;

namespace {

std::size_t hyperedge_edges(const Sag& g) {
  std::size_t n = 0;
  for (const auto& f : g.faces()) n += f.edge_ids.size();
  return n;
}

int find_edge(const Sag& g, int tail, int head) {
  for (std::size_t e = 0; e < g.edges().size(); ++e)
    if (g.edges()[e].tail == tail && g.edges()[e].head == head) return static_cast<int>(e);
  return -1;
}

}  // namespace

TEST_CASE("element counts") {
  const Sag cube = build_sag(data::unit_cube());
  CHECK(cube.node_count() == 8);
  CHECK(cube.edges().size() == 24);
  CHECK(cube.faces().size() == 6);
  CHECK(hyperedge_edges(cube) == 24);

  const Sag tet = build_sag(data::regular_tetrahedron());
  CHECK(tet.node_count() == 4);
  CHECK(tet.edges().size() == 12);
  CHECK(tet.faces().size() == 4);

  const Sag prism = build_sag(data::triangular_prism());
  CHECK(prism.node_count() == 6);
  CHECK(prism.edges().size() == 18);
  CHECK(prism.faces().size() == 5);
}

TEST_CASE("round trip back to a polyhedron") {
  for (const Polyhedron& p : {data::unit_cube({0.2, 0.4}), data::regular_tetrahedron(), data::square_pyramid()}) {
    const Polyhedron q = sag_to_polyhedron(build_sag(p));
    REQUIRE(q.vertices.size() == p.vertices.size());
    for (std::size_t v = 0; v < p.vertices.size(); ++v) CHECK(q.vertices[v] == p.vertices[v]);
    REQUIRE(q.faces.size() == p.faces.size());
    for (std::size_t f = 0; f < p.faces.size(); ++f) {
      CHECK(same_cycle(q.faces[f].loop, p.faces[f].loop));
      CHECK(q.faces[f].attr == p.faces[f].attr);
    }
  }
}

TEST_CASE("invalid solids are refused") {
  Polyhedron p = data::unit_cube();
  p.faces.pop_back();
  require_error(ErrorCode::InvalidPolyhedron, [&] { build_sag(p); });
}

TEST_CASE("broken hyperedge chain") {
  const Sag cube = build_sag(data::unit_cube());
  auto faces = cube.faces();
  faces[0].edge_ids.pop_back();
  const SagTopology broken(cube.node_count(), cube.edges(), faces, cube.topology().attrs());
  require_error(ErrorCode::InconsistentHyperedge, [&] { broken.face_loop(0); });
  require_error(ErrorCode::InconsistentHyperedge, [&] { broken.check(); });
}

TEST_CASE("edge without a twin") {
  std::vector<DirectedEdge> edges{{0, 1, 0}, {1, 2, 0}, {2, 0, 0}};
  require_error(ErrorCode::InvariantViolation, [&] { SagTopology(3, edges, {}, {}); });
}

TEST_CASE("opposite edges") {
  const Sag cube = build_sag(data::unit_cube());
  const int e01 = find_edge(cube, 0, 1);
  const int e10 = find_edge(cube, 1, 0);
  REQUIRE(e01 >= 0);
  REQUIRE(e10 >= 0);
  CHECK(cube.opposite_edge(e01) == e10);
  // 0 -> 1 runs along the front face (y = 0), 1 -> 0 along the bottom.
  CHECK(cube.edges()[static_cast<std::size_t>(e01)].face == 2);
  CHECK(cube.edges()[static_cast<std::size_t>(e10)].face == 0);

  for (const Polyhedron& p : {data::unit_cube(), data::regular_tetrahedron(), data::triangular_prism()}) {
    const Sag g = build_sag(p);
    for (int e = 0; e < static_cast<int>(g.edges().size()); ++e) {
      const int o = g.opposite_edge(e);
      CHECK(g.opposite_edge(o) == e);
      CHECK(g.edges()[static_cast<std::size_t>(o)].face != g.edges()[static_cast<std::size_t>(e)].face);
      CHECK(g.edges()[static_cast<std::size_t>(o)].tail == g.edges()[static_cast<std::size_t>(e)].head);
    }
  }
}

TEST_CASE("neighbors") {
  for (const Polyhedron& p : {data::unit_cube(), data::regular_tetrahedron(), data::triangular_prism()}) {
    const Sag g = build_sag(p);
    for (int v = 0; v < g.node_count(); ++v) CHECK(g.neighbors(v).size() == 3);
  }
  const Sag tet = build_sag(data::regular_tetrahedron());
  auto n = tet.neighbors(0);
  std::sort(n.begin(), n.end());
  CHECK(n == std::vector<int>{1, 2, 3});
}

TEST_CASE("topology from loops ignores coordinates") {
  const Polyhedron p = data::unit_cube({1.0});
  const SagTopology t = topology_from_loops(8, p.faces);
  t.check();
  CHECK(t.edges().size() == 24);
  for (int f = 0; f < 6; ++f) {
    CHECK(same_cycle(t.face_loop(f), p.faces[static_cast<std::size_t>(f)].loop));
    CHECK(t.face_attr(f) == AttrVector{1.0});
  }
}
