#include "polynet/harness.hpp"

#include "support.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <random>

using namespace polynet;
using namespace polynet::harness;
using test::require_error;

namespace {

nn::Matrix rows(std::initializer_list<std::initializer_list<double>> values) {
  nn::Matrix m(values.size(), values.begin()->size());
  std::size_t r = 0;
  for (const auto& row : values) {
    std::size_t c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

std::vector<data::PolyhedronRecord> small_corpus(std::uint64_t seed) {
  data::SyntheticOptions opts;
  opts.kinds = {data::SolidKind::Tetrahedron, data::SolidKind::Cube};
  opts.per_class = 10;
  opts.seed = seed;
  return data::synthetic_dataset(opts);
}

TrainConfig quick_config() {
  TrainConfig cfg;
  cfg.hidden = 8;
  cfg.layers = 1;
  cfg.max_epochs = 3;
  cfg.batch_size = 4;
  cfg.seed = 5;
  return cfg;
}

void reseal(std::vector<std::uint8_t>& bytes) {
  const std::size_t body = bytes.size() - 4;
  const std::uint32_t crc = static_cast<std::uint32_t>(::crc32(0L, bytes.data(), static_cast<uInt>(body)));
  std::memcpy(bytes.data() + body, &crc, 4);
}

}  // namespace

TEST_CASE("average precision and NDCG") {
  const bool ranking[] = {true, false, true};
  CHECK(average_precision(ranking) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  CHECK(ndcg_at(ranking, 2) == doctest::Approx(1.0 / (1.0 + 1.0 / std::log2(3.0))).epsilon(1e-15));
  const bool perfect[] = {true, true, false};
  CHECK(average_precision(perfect) == 1.0);
  CHECK(ndcg_at(perfect, 2) == 1.0);
  const bool none[] = {false, false};
  CHECK(average_precision(none) == 0.0);
}

TEST_CASE("retrieval on separated embeddings") {
  const nn::Matrix emb = rows({{1, 0.1}, {1, 0.2}, {0.1, 1}, {0.2, 1}, {0.15, 1}});
  const std::vector<int> labels{0, 0, 1, 1, 1};
  for (Similarity s : {Similarity::Cosine, Similarity::Euclidean}) {
    const auto m = retrieval_metrics(emb, labels, s);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
    CHECK(m.map == 1.0);
    CHECK(m.ndcg == 1.0);
    CHECK(m.queries == 5);
  }
}

TEST_CASE("retrieval skips singleton classes") {
  const nn::Matrix emb = rows({{1, 0}, {0.9, 0.1}, {0, 1}});
  std::vector<std::string> warnings;
  const auto m = retrieval_metrics(emb, {0, 0, 1}, Similarity::Cosine, &warnings);
  CHECK(m.queries == 2);
  CHECK(m.skipped == 1);
  CHECK(warnings.size() == 1);
}

TEST_CASE("retrieval precision equals recall per query") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  nn::Matrix emb(12, 4);
  for (double& v : emb.values()) v = g(rng);
  const std::vector<int> labels{0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2, 2};
  const auto m = retrieval_metrics(emb, labels);
  CHECK(m.precision == doctest::Approx(m.recall).epsilon(1e-15));
}

TEST_CASE("classification metrics") {
  SUBCASE("perfect predictor") {
    const auto m = classification_metrics(rows({{0.9, 0.1}, {0.8, 0.2}, {0.3, 0.7}, {0.1, 0.9}}), {0, 0, 1, 1});
    CHECK(m.acc == 1.0);
    CHECK(m.precision == 1.0);
    CHECK(m.f1 == 1.0);
    CHECK(m.auc == 1.0);
  }
  SUBCASE("hand example") {
    // Predictions 0,1,1,1 for labels 0,0,1,1.
    const auto m = classification_metrics(rows({{0.9, 0.1}, {0.4, 0.6}, {0.3, 0.7}, {0.2, 0.8}}), {0, 0, 1, 1});
    CHECK(m.acc == 0.75);
    CHECK(m.precision == doctest::Approx(0.5 * 1.0 + 0.5 * (2.0 / 3.0)));
    CHECK(m.f1 == doctest::Approx(0.5 * (2.0 / 3.0) + 0.5 * 0.8));
    CHECK(m.auc == 1.0);
  }
  SUBCASE("ties count half") {
    const double scores[] = {0.5, 0.5, 0.5, 0.5};
    const bool pos[] = {true, false, true, false};
    CHECK(binary_auc(scores, pos) == 0.5);
  }
  SUBCASE("random scores") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u;
    std::vector<double> scores(4000);
    std::unique_ptr<bool[]> pos(new bool[4000]);
    for (std::size_t i = 0; i < 4000; ++i) {
      scores[i] = u(rng);
      pos[i] = i % 2 == 0;
    }
    CHECK(std::abs(binary_auc(scores, std::span<const bool>(pos.get(), 4000)) - 0.5) < 0.05);
  }
  SUBCASE("one class is undefined") {
    require_error(ErrorCode::Undefined, [] { classification_metrics(rows({{0.9, 0.1}, {0.8, 0.2}}), {0, 0}); });
  }
}

TEST_CASE("config documents") {
  const auto cfg = config_from_json(R"({"data": "x.jsonl", "hidden": 16, "lr": 0.01, "seed": 4,
                                        "attr_edge_orientation": "forward", "similarity": "euclidean"})");
  CHECK(cfg.hidden == 16);
  CHECK(cfg.lr == 0.01);
  CHECK(cfg.seed == 4);
  CHECK(cfg.attr_orientation == gnn::AttrOrientation::Forward);
  CHECK(cfg.similarity == Similarity::Euclidean);
  CHECK(cfg.max_epochs == 500);
  const auto back = config_from_json(config_to_json(cfg));
  CHECK(config_to_json(back) == config_to_json(cfg));
  CHECK(config_hash(back) == config_hash(cfg));
  CHECK(config_hash(cfg).size() == 16);
  auto other = cfg;
  other.seed = 5;
  CHECK(config_hash(other) != config_hash(cfg));

  require_error(ErrorCode::Config, [] { config_from_json(R"({"hiden": 3})"); });
  require_error(ErrorCode::Config, [] { config_from_json(R"({"hidden": "big"})"); });
  require_error(ErrorCode::Config, [] { config_from_json(R"({"batch_size": 1})"); });
  require_error(ErrorCode::Config, [] { config_from_json("[1, 2]"); });
  require_error(ErrorCode::Io, [] { load_config("/nonexistent/config.json"); });
}

TEST_CASE("checkpoints") {
  const auto records = small_corpus(1);
  const auto split = data::split_dataset(records, 3);
  const auto cfg = quick_config();
  const TrainResult result = train(cfg, split);
  CHECK(result.log.size() == 3);
  CHECK(result.checkpoint.best_epoch >= 1);

  auto model = model_from_checkpoint(result.checkpoint);
  const auto graphs = prepare_graphs(split.test, model.config(), false);
  const nn::Matrix logits = predict_logits(model, graphs, 8);

  SUBCASE("round trip gives identical logits") {
    const auto bytes = encode_checkpoint(result.checkpoint);
    const Checkpoint back = decode_checkpoint(bytes);
    CHECK(encode_checkpoint(back) == bytes);
    auto reloaded = model_from_checkpoint(back);
    CHECK(predict_logits(reloaded, graphs, 8).values() == logits.values());
    CHECK(predict_logits(reloaded, graphs, 3).values() == logits.values());
  }
  SUBCASE("files") {
    const auto path = std::filesystem::temp_directory_path() / "polynet_test.ckpt";
    save_checkpoint(path, result.checkpoint);
    auto reloaded = model_from_checkpoint(load_checkpoint(path));
    CHECK(predict_logits(reloaded, graphs, 8).values() == logits.values());
    std::filesystem::remove(path);
  }
  SUBCASE("corruption and truncation") {
    auto bytes = encode_checkpoint(result.checkpoint);
    auto flipped = bytes;
    flipped[bytes.size() / 2] ^= 0x10;
    require_error(ErrorCode::Integrity, [&] { decode_checkpoint(flipped); });
    const std::span<const std::uint8_t> cut(bytes.data(), bytes.size() - 9);
    require_error(ErrorCode::Integrity, [&] { decode_checkpoint(cut); });
    require_error(ErrorCode::Integrity, [&] { decode_checkpoint({}); });
  }
  SUBCASE("version mismatch") {
    auto bytes = encode_checkpoint(result.checkpoint);
    const std::uint32_t future = kCheckpointVersion + 1;
    std::memcpy(bytes.data() + 4, &future, 4);
    reseal(bytes);
    require_error(ErrorCode::Version, [&] { decode_checkpoint(bytes); });
  }
  SUBCASE("mismatched width") {
    auto mcfg = result.checkpoint.model;
    mcfg.hidden = 16;
    gnn::PolyhedronGnn wider(mcfg);
    require_error(ErrorCode::Dimension, [&] { restore_model(result.checkpoint, wider); });
  }
}

TEST_CASE("training is reproducible") {
  const auto split = data::split_dataset(small_corpus(2), 7);
  const auto cfg = quick_config();
  const auto a = train(cfg, split);
  const auto b = train(cfg, split);
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t e = 0; e < a.log.size(); ++e) CHECK(format_epoch(a.log[e]) == format_epoch(b.log[e]));
  CHECK(encode_checkpoint(a.checkpoint) == encode_checkpoint(b.checkpoint));
}

TEST_CASE("zero learning rate leaves the weights alone") {
  const auto split = data::split_dataset(small_corpus(2), 7);
  auto cfg = quick_config();
  cfg.lr = 0.0;
  const auto r = train(cfg, split);
  gnn::PolyhedronGnn fresh(r.checkpoint.model);
  const auto params = fresh.parameters();
  REQUIRE(params.size() == r.checkpoint.params.size());
  for (std::size_t i = 0; i < params.size(); ++i) CHECK(params[i]->value.values() == r.checkpoint.params[i].values());
}

TEST_CASE("training input checks") {
  auto records = small_corpus(3);
  for (auto& r : records) r.label = 0;
  records[0].label = 2;
  const auto split = data::split_dataset(records, 1);
  require_error(ErrorCode::Config, [&] { train(quick_config(), split); });
}

TEST_CASE("invariance self check") {
  const auto r = invariance_check(10, 4);
  CHECK(r.trials == 10);
  CHECK(r.max_rigid_deviation < 1e-9);
  CHECK(r.max_embedding_deviation < 1e-6);
}
