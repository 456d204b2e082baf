#pragma once

#include "polynet/geom.hpp"
#include "polynet/sag.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace polynet::data {

struct PolyhedronRecord {
  Polyhedron polyhedron;
  int label = 0;
  std::string id;
};

// ---- polyhedron JSON -------------------------------------------------------
//
// {"vertices":[[x,y,z],...],"faces":[{"loop":[...],"attr":[...]},...],
//  "label":int,"id":string}
//
// Reals are written with 17 significant digits so decoding is bit-exact.

std::string encode_record(const PolyhedronRecord& record);
// Throws Schema naming the offending field (e.g. "faces[2].loop"), Dimension
// when attribute lengths disagree with each other or with `attr_dim`, and
// InvalidPolyhedron when the decoded solid fails validation.
PolyhedronRecord decode_record(std::string_view text, std::optional<std::size_t> attr_dim = std::nullopt);

PolyhedronRecord load_record(const std::filesystem::path& path, std::optional<std::size_t> attr_dim = std::nullopt);
void save_record(const std::filesystem::path& path, const PolyhedronRecord& record);

// JSON-lines corpus: one record per line.
void write_corpus(std::ostream& os, std::span<const PolyhedronRecord> records);
std::vector<PolyhedronRecord> read_corpus(std::istream& is, std::optional<std::size_t> attr_dim = std::nullopt);
std::vector<PolyhedronRecord> load_corpus(const std::filesystem::path& path,
                                          std::optional<std::size_t> attr_dim = std::nullopt);
void save_corpus(const std::filesystem::path& path, std::span<const PolyhedronRecord> records);

// Manifest: JSON-lines of {"path", "label", "id"}; paths resolve against the
// manifest's directory.
struct ManifestEntry {
  std::string path;
  int label = 0;
  std::string id;
};
std::vector<ManifestEntry> read_manifest(std::istream& is);
std::vector<PolyhedronRecord> load_manifest(const std::filesystem::path& path,
                                            std::optional<std::size_t> attr_dim = std::nullopt);

// Loads either a manifest (any line carrying "path") or a corpus.
std::vector<PolyhedronRecord> load_dataset(const std::filesystem::path& path,
                                           std::optional<std::size_t> attr_dim = std::nullopt);

// Topology document: {"node_count": n, "faces":[{"loop":[...],"attr":[...]}]}.
std::string encode_topology(const Polyhedron& p);
SagTopology decode_topology(std::string_view text);

// ---- OBJ / MTL -------------------------------------------------------------

struct TriangleMesh {
  std::vector<Point3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<AttrVector> triangle_attrs;
};

using MaterialTable = std::map<std::string, AttrVector>;

// newmtl + Kd; other statements are ignored.
MaterialTable parse_mtl(std::istream& is);
MaterialTable load_mtl(const std::filesystem::path& path);

// v, f (triangles or fans; 1-based or negative indices; v/vt/vn forms) and
// usemtl. Faces before any usemtl get an all-zero attribute of the table's
// dimension. Does not check topology.
TriangleMesh parse_obj(std::istream& is, const MaterialTable& materials);
// parse_obj from a file, then check_closed_manifold.
TriangleMesh import_obj(const std::filesystem::path& path, const MaterialTable& materials);

// Every undirected edge must be used exactly once in each direction.
void check_closed_manifold(const TriangleMesh& mesh);

// Fan triangulation of every face, attributes copied per face.
TriangleMesh triangulate(const Polyhedron& p);
TriangleMesh make_icosphere(int subdivisions, const AttrVector& attr = {});

struct MergeOptions {
  double normal_tol = 1e-6;
  int max_faces = 64;
};

struct MergeResult {
  std::optional<Polyhedron> polyhedron;
  std::string rejection;  // empty when accepted

  bool accepted() const { return polyhedron.has_value(); }
};

// Unites edge-adjacent triangles with matching normals and identical
// attributes, then traces each region's boundary into one face loop.
MergeResult merge_coplanar_faces(const TriangleMesh& mesh, const MergeOptions& options = {});

// ---- builders --------------------------------------------------------------

struct LabeledPolygon {
  std::vector<Point2> vertices;
  int label = 0;
  std::string id;
};

std::vector<LabeledPolygon> read_polygons(std::istream& is);  // JSON-lines {"polygon":[[x,y],...],"label","id"}

std::vector<PolyhedronRecord> build_extrusion_dataset(std::span<const LabeledPolygon> polygons, double height,
                                                      const ColorScheme& scheme, bool rotate, std::uint64_t seed,
                                                      std::vector<std::string>* log = nullptr);

// Independent per-record stream derived from a dataset seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

enum class SolidKind { Tetrahedron, Cube, Prism, Pyramid };

Polyhedron unit_cube(const AttrVector& attr = {});
Polyhedron regular_tetrahedron(const AttrVector& attr = {});
Polyhedron triangular_prism(const AttrVector& attr = {});
Polyhedron square_pyramid(const AttrVector& attr = {});
Polyhedron canonical_solid(SolidKind kind, const AttrVector& attr = {});

// Canonical solid pushed through a random near-identity affine map (faces stay
// planar), plus per-kind free-vertex jitter where planarity allows it.
Polyhedron jittered_solid(SolidKind kind, std::mt19937_64& rng, double jitter, const AttrVector& attr = {});

// Star-shaped, hence simple and counterclockwise.
std::vector<Point2> random_simple_polygon(std::mt19937_64& rng, int vertex_count);

struct SyntheticOptions {
  std::vector<SolidKind> kinds{SolidKind::Tetrahedron, SolidKind::Cube, SolidKind::Prism};
  int per_class = 100;
  double jitter = 0.15;
  bool rotate = true;
  AttrVector attr;  // uniform face attribute
  std::uint64_t seed = 0;
};

// Cycles through tetrahedron, cube, prism, pyramid and the extrusion of a
// random simple polygon (3 to 9 vertices), by index.
Polyhedron random_test_solid(std::mt19937_64& rng, std::size_t index, double jitter = 0.15,
                             const AttrVector& attr = {});

// Label = index into `kinds`.
std::vector<PolyhedronRecord> synthetic_dataset(const SyntheticOptions& options);

// Reverses any face whose normal points toward the vertex centroid (convex only).
void orient_outward_convex(Polyhedron& p);

// ---- splits ----------------------------------------------------------------

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

// Seeded shuffle, then floor(60%) train, floor(20%) val, remainder test.
SplitIndices split_indices(std::size_t count, std::uint64_t seed);

template <typename T>
struct Split {
  std::vector<T> train;
  std::vector<T> val;
  std::vector<T> test;
};

template <typename T>
Split<T> split_dataset(const std::vector<T>& records, std::uint64_t seed) {
  const SplitIndices idx = split_indices(records.size(), seed);
  Split<T> out;
  for (auto i : idx.train) out.train.push_back(records[i]);
  for (auto i : idx.val) out.val.push_back(records[i]);
  for (auto i : idx.test) out.test.push_back(records[i]);
  return out;
}

}  // namespace polynet::data
