#include "polynet/error.hpp"
#include "polynet/harness.hpp"

#include <cmath>
#include <random>

namespace polynet::harness {

namespace {

void paint(Polyhedron& p, std::mt19937_64& rng, int attr_dim) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& f : p.faces) {
    f.attr.resize(static_cast<std::size_t>(attr_dim));
    for (double& a : f.attr) a = u(rng);
  }
}

double relative_l2(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0;
  double norm = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    norm += a[i] * a[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(norm), 1e-300);
}

}  // namespace

nn::GradCheckResult model_grad_check(const gnn::GnnConfig& cfg, std::uint64_t seed, nn::Mode mode) {
  std::mt19937_64 rng(seed);
  std::vector<Polyhedron> solids{data::jittered_solid(data::SolidKind::Tetrahedron, rng, 0.15),
                                 data::jittered_solid(data::SolidKind::Cube, rng, 0.15)};
  std::vector<gnn::GraphFeatures> features;
  for (auto& p : solids) {
    paint(p, rng, cfg.attr_dim);
    features.push_back(gnn::precompute_graph_features(build_sag(p), cfg));
  }
  const std::vector<const gnn::GraphFeatures*> parts{&features[0], &features[1]};
  const gnn::GraphBatch batch = gnn::GraphBatch::assemble(parts);
  const std::vector<int> labels{0, std::min(1, cfg.num_classes - 1)};

  gnn::PolyhedronGnn model(cfg);
  const auto params = model.parameters();
  // Fresh betas are exactly zero, so an all-zero row feeding a batch norm sits
  // on a ReLU kink. Move off it.
  std::uniform_real_distribution<double> nudge(-0.1, 0.1);
  for (nn::Parameter* p : params)
    for (double& v : p->value.values()) v += nudge(rng);
  auto loss = [&] { return nn::cross_entropy(model.forward(batch, mode).logits, labels).loss; };
  auto analytic = [&] { model.loss_and_gradients(batch, labels, mode); };
  nn::GradCheckOptions opts;
  opts.seed = seed;
  return nn::grad_check(params, loss, analytic, opts);
}

InvarianceReport invariance_check(int trials, std::uint64_t seed) {
  if (trials < 1) throw Error(ErrorCode::Config, "trials must be positive");
  InvarianceReport report;
  report.trials = trials;

  gnn::GnnConfig cfg;
  cfg.hidden = 16;
  cfg.seed = seed;
  gnn::PolyhedronGnn model(cfg);
  std::uniform_real_distribution<double> shift(-5.0, 5.0);

  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(data::derive_seed(seed, static_cast<std::uint64_t>(t)));
    const Polyhedron p = data::random_test_solid(rng, static_cast<std::size_t>(t));
    const RigidTransform rotation = sample_random_rotation(rng());
    const RigidTransform motion(rotation.rotation(), Point3(shift(rng), shift(rng), shift(rng)));
    const Polyhedron q = apply_rigid_transform(p, motion);

    const Sag gp = build_sag(p);
    const Sag gq = build_sag(q);
    report.max_rigid_deviation =
        std::max(report.max_rigid_deviation, rigid_set_deviation(compute_rigid_set(gp), compute_rigid_set(gq)));

    const auto fp = gnn::precompute_graph_features(gp, cfg);
    const auto fq = gnn::precompute_graph_features(gq, cfg);
    const std::vector<const gnn::GraphFeatures*> bp{&fp};
    const std::vector<const gnn::GraphFeatures*> bq{&fq};
    const nn::Matrix hp = model.embed(gnn::GraphBatch::assemble(bp));
    const nn::Matrix hq = model.embed(gnn::GraphBatch::assemble(bq));
    report.max_embedding_deviation = std::max(report.max_embedding_deviation, relative_l2(hp.row(0), hq.row(0)));
  }
  return report;
}

}  // namespace polynet::harness
