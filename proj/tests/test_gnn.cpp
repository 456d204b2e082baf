#include "polynet/gnn.hpp"
#include "polynet/harness.hpp"

#include "support.hpp"

#include <cmath>
#include <numeric>
#include <set>

using namespace polynet;
using test::require_error;

namespace {

gnn::GnnConfig tiny(int attr_dim = 3, int hidden = 8) {
  gnn::GnnConfig cfg;
  cfg.hidden = hidden;
  cfg.layers = 2;
  cfg.attr_dim = attr_dim;
  cfg.num_classes = 3;
  cfg.seed = 21;
  return cfg;
}

gnn::GraphBatch single(const gnn::GraphFeatures& f) {
  const std::vector<const gnn::GraphFeatures*> parts{&f};
  return gnn::GraphBatch::assemble(parts);
}

double relative_gap(std::span<const double> a, std::span<const double> b) {
  double d = 0.0, n = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - b[i]) * (a[i] - b[i]);
    n += a[i] * a[i];
  }
  return std::sqrt(d / n);
}

Polyhedron painted_cube() {
  Polyhedron p = data::unit_cube();
  for (std::size_t f = 0; f < p.faces.size(); ++f)
    p.faces[f].attr = {0.1 * static_cast<double>(f), 1.0, f % 2 ? 1.0 : 0.0};
  return p;
}

}  // namespace

TEST_CASE("feature precompute") {
  const auto cfg = tiny();
  const auto f = gnn::precompute_graph_features(build_sag(painted_cube()), cfg);
  CHECK(f.path_count() == 72);
  CHECK(f.guide_input.rows() == 72);
  CHECK(f.guide_input.cols() == 10);
  CHECK(f.node_count == 8);
  for (std::size_t r = 0; r < 72; ++r) {
    CHECK(f.guide_input(r, 0) == 1.0);  // unit edges over a unit mean
    CHECK(std::abs(f.guide_input(r, 2)) <= 1.0);
    CHECK(std::abs(f.guide_input(r, 3)) <= 1.0);
  }
  CHECK(gnn::precompute_graph_features(build_sag(data::unit_cube()), tiny(0)).guide_input.cols() == 4);
  require_error(ErrorCode::Dimension, [&] { gnn::precompute_graph_features(build_sag(data::unit_cube()), cfg); });
}

TEST_CASE("features of a rotated cube match") {
  const auto cfg = tiny();
  const Polyhedron p = painted_cube();
  const auto a = gnn::precompute_graph_features(build_sag(p), cfg);
  const RigidTransform t(sample_random_rotation(4).rotation(), Point3(1, 2, 3));
  const auto b = gnn::precompute_graph_features(build_sag(apply_rigid_transform(p, t)), cfg);
  REQUIRE(a.guide_input.same_shape(b.guide_input));
  for (std::size_t i = 0; i < a.guide_input.size(); ++i)
    CHECK(std::abs(a.guide_input.values()[i] - b.guide_input.values()[i]) < 1e-9);
  CHECK(a.path_type == b.path_type);
}

TEST_CASE("attribute orientation picks different faces") {
  auto cfg = tiny();
  const Sag g = build_sag(painted_cube());
  const auto reversed = gnn::precompute_graph_features(g, cfg);
  cfg.attr_orientation = gnn::AttrOrientation::Forward;
  const auto forward = gnn::precompute_graph_features(g, cfg);
  CHECK(reversed.guide_input.values() != forward.guide_input.values());
}

TEST_CASE("masking zeroes only attribute columns") {
  const auto cfg = tiny();
  auto f = gnn::precompute_graph_features(build_sag(painted_cube()), cfg);
  const auto before = f.guide_input;
  gnn::mask_attributes(f, cfg.attr_dim);
  for (std::size_t r = 0; r < f.guide_input.rows(); ++r) {
    for (std::size_t c = 0; c < 4; ++c) CHECK(f.guide_input(r, c) == before(r, c));
    for (std::size_t c = 4; c < 10; ++c) CHECK(f.guide_input(r, c) == 0.0);
  }
}

TEST_CASE("batch assembly shifts node ids") {
  const auto cfg = tiny(0);
  const auto a = gnn::precompute_graph_features(build_sag(data::unit_cube()), cfg);
  const auto b = gnn::precompute_graph_features(build_sag(data::regular_tetrahedron()), cfg);
  const std::vector<const gnn::GraphFeatures*> parts{&a, &b};
  const auto batch = gnn::GraphBatch::assemble(parts);
  CHECK(batch.graph_count == 2);
  CHECK(batch.node_count() == 12);
  CHECK(batch.path_count() == 72 + 36);
  CHECK(batch.path_i[72] == b.path_i[0] + 8);
  CHECK(batch.node_graph[8] == 1);
  CHECK(batch.rows_by_type[0].size() + batch.rows_by_type[1].size() == batch.path_count());
}

TEST_CASE("forward shapes and determinism") {
  const auto cfg = tiny();
  gnn::PolyhedronGnn model(cfg);
  const auto f = gnn::precompute_graph_features(build_sag(painted_cube()), cfg);
  const auto batch = single(f);
  const auto out = model.forward(batch, nn::Mode::Eval);
  CHECK(out.embedding.rows() == 1);
  CHECK(out.embedding.cols() == 16);
  CHECK(out.logits.cols() == 3);
  CHECK(model.forward(batch, nn::Mode::Eval).embedding.values() == out.embedding.values());
  CHECK(model.embed(batch).values() == out.embedding.values());
  CHECK(model.forward(batch, nn::Mode::Eval, false).logits.empty());
}

TEST_CASE("embedding is invariant under rigid motion") {
  const auto cfg = tiny();
  gnn::PolyhedronGnn model(cfg);
  const Polyhedron p = painted_cube();
  const RigidTransform t(sample_random_rotation(8).rotation(), Point3(-3, 1, 0.5));
  const auto fa = gnn::precompute_graph_features(build_sag(p), cfg);
  const auto fb = gnn::precompute_graph_features(build_sag(apply_rigid_transform(p, t)), cfg);
  const auto ea = model.embed(single(fa));
  const auto eb = model.embed(single(fb));
  CHECK(relative_gap(ea.values(), eb.values()) < 1e-6);
}

TEST_CASE("path order does not matter") {
  const auto cfg = tiny();
  gnn::PolyhedronGnn model(cfg);
  const auto f = gnn::precompute_graph_features(build_sag(painted_cube()), cfg);
  std::vector<std::size_t> perm(f.path_count());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(2);
  std::shuffle(perm.begin(), perm.end(), rng);
  gnn::GraphFeatures g = f;
  for (std::size_t r = 0; r < perm.size(); ++r) {
    g.path_i[r] = f.path_i[perm[r]];
    g.path_j[r] = f.path_j[perm[r]];
    g.path_k[r] = f.path_k[perm[r]];
    g.path_type[r] = f.path_type[perm[r]];
    std::copy(f.guide_input.row(perm[r]).begin(), f.guide_input.row(perm[r]).end(), g.guide_input.row(r).begin());
  }
  const auto a = model.embed(single(f));
  const auto b = model.embed(single(g));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.values()[i] - b.values()[i]) < 1e-9);
}

TEST_CASE("cross messages matter") {
  const auto cfg = tiny();
  gnn::PolyhedronGnn model(cfg);
  const auto f = gnn::precompute_graph_features(build_sag(painted_cube()), cfg);
  const auto before = model.embed(single(f));
  CHECK(model.path_weight(0, PathType::Cross).value(0, 0) == 1.0);
  for (int l = 0; l < cfg.layers; ++l) model.path_weight(l, PathType::Cross).value.fill(0.0);
  CHECK(model.embed(single(f)).values() != before.values());
}

TEST_CASE("parameter inventory") {
  gnn::PolyhedronGnn model(tiny());
  const auto params = model.parameters();
  std::set<std::string> names;
  for (auto* p : params) names.insert(p->name);
  CHECK(names.size() == params.size());
  CHECK(names.count("layer0.w.inner") == 1);
  CHECK(names.count("layer1.w.cross") == 1);
  CHECK_FALSE(model.buffers().empty());
}

TEST_CASE("full model gradients") {
  gnn::GnnConfig cfg;
  cfg.hidden = 4;
  cfg.layers = 2;
  cfg.attr_dim = 3;
  cfg.num_classes = 2;
  const auto r = harness::model_grad_check(cfg, 0);
  CHECK_MESSAGE(r.max_rel_error < 1e-4, r.worst, " ", r.max_rel_error);
  std::size_t entries = 0;
  gnn::PolyhedronGnn model(cfg);
  for (const nn::Parameter* p : model.parameters()) entries += p->value.values().size();
  CHECK(r.checked == entries);
}

TEST_CASE("training steps") {
  const auto cfg = tiny(0, 16);
  std::mt19937_64 rng(5);
  std::vector<gnn::GraphFeatures> feats;
  std::vector<int> labels;
  const data::SolidKind kinds[] = {data::SolidKind::Tetrahedron, data::SolidKind::Cube, data::SolidKind::Prism};
  for (int i = 0; i < 12; ++i) {
    feats.push_back(gnn::precompute_graph_features(build_sag(data::jittered_solid(kinds[i % 3], rng, 0.15)), cfg));
    labels.push_back(i % 3);
  }
  std::vector<const gnn::GraphFeatures*> parts;
  for (const auto& f : feats) parts.push_back(&f);
  const auto batch = gnn::GraphBatch::assemble(parts);

  SUBCASE("zero learning rate changes nothing") {
    gnn::PolyhedronGnn model(cfg);
    std::vector<nn::Matrix> before;
    for (auto* p : model.parameters()) before.push_back(p->value);
    nn::AdamState adam;
    const double loss = model.train_step(batch, labels, adam, 0.0);
    CHECK(std::isfinite(loss));
    const auto params = model.parameters();
    for (std::size_t n = 0; n < params.size(); ++n) CHECK(params[n]->value.values() == before[n].values());
  }
  SUBCASE("overfits a small batch") {
    gnn::PolyhedronGnn model(cfg);
    nn::AdamState adam;
    for (int step = 0; step < 200; ++step) model.train_step(batch, labels, adam, 1e-3);
    const auto logits = model.forward(batch, nn::Mode::Train).logits;
    int correct = 0;
    for (std::size_t r = 0; r < logits.rows(); ++r) {
      const auto row = logits.row(r);
      correct += std::max_element(row.begin(), row.end()) - row.begin() == labels[r];
    }
    CHECK(correct == 12);
  }
  SUBCASE("label mismatch") {
    gnn::PolyhedronGnn model(cfg);
    require_error(ErrorCode::Dimension, [&] { model.loss_and_gradients(batch, {0, 1}); });
  }
}

TEST_CASE("configuration checks") {
  auto cfg = tiny();
  cfg.layers = 0;
  require_error(ErrorCode::Config, [&] { gnn::PolyhedronGnn{cfg}; });
}
