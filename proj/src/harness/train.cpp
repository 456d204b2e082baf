#include "polynet/error.hpp"
#include "polynet/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace polynet::harness {

namespace {

gnn::GraphBatch batch_of(std::span<const PreparedGraph> graphs, std::span<const std::size_t> idx) {
  std::vector<const gnn::GraphFeatures*> parts;
  parts.reserve(idx.size());
  for (auto i : idx) parts.push_back(&graphs[i].features);
  return gnn::GraphBatch::assemble(parts);
}

// Consecutive index ranges; a trailing singleton joins the previous batch.
std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t n, std::size_t size, bool avoid_singleton) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t a = 0; a < n; a += size) out.emplace_back(a, std::min(n, a + size));
  if (avoid_singleton && out.size() > 1 && out.back().second - out.back().first == 1) {
    out[out.size() - 2].second = out.back().second;
    out.pop_back();
  }
  return out;
}

std::string rng_state(const std::mt19937_64& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

struct ValResult {
  double loss = 0.0;
  double acc = 0.0;
};

ValResult validate(gnn::PolyhedronGnn& model, std::span<const PreparedGraph> graphs, int batch_size) {
  const nn::Matrix logits = predict_logits(model, graphs, batch_size);
  std::vector<int> labels;
  for (const auto& g : graphs) labels.push_back(g.label);
  ValResult r;
  r.loss = nn::cross_entropy(logits, labels).loss;
  double correct = 0.0;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const auto row = logits.row(i);
    if (std::max_element(row.begin(), row.end()) - row.begin() == labels[i]) correct += 1.0;
  }
  r.acc = correct / static_cast<double>(graphs.size());
  return r;
}

}  // namespace

std::vector<PreparedGraph> prepare_graphs(std::span<const data::PolyhedronRecord> records, const gnn::GnnConfig& cfg,
                                          bool mask_attributes) {
  std::vector<PreparedGraph> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    PreparedGraph g;
    try {
      g.features = gnn::precompute_graph_features(build_sag(r.polyhedron), cfg);
    } catch (const Error& e) {
      throw Error(e.code(), "record '" + r.id + "': " + e.what());
    }
    if (mask_attributes) gnn::mask_attributes(g.features, cfg.attr_dim);
    if (r.label < 0 || r.label >= cfg.num_classes)
      throw Error(ErrorCode::Label, "record '" + r.id + "' has label " + std::to_string(r.label) + " outside [0, " +
                                        std::to_string(cfg.num_classes) + ")");
    g.label = r.label;
    g.id = r.id;
    out.push_back(std::move(g));
  }
  return out;
}

std::string format_epoch(const EpochLog& e) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "epoch %d train_loss %.17g val_loss %.17g val_acc %.17g lr %.17g", e.epoch,
                e.train_loss, e.val_loss, e.val_acc, e.lr);
  return buf;
}

data::Split<data::PolyhedronRecord> load_split(const TrainConfig& cfg) {
  if (cfg.data.empty()) throw Error(ErrorCode::Config, "config has no 'data' path");
  const auto records =
      data::load_dataset(cfg.data, cfg.attr_dim >= 0 ? std::optional<std::size_t>(cfg.attr_dim) : std::nullopt);
  return data::split_dataset(records, cfg.seed);
}

TrainResult train(const TrainConfig& cfg, const data::Split<data::PolyhedronRecord>& split, std::ostream* progress) {
  cfg.check();
  if (split.train.size() < 2) throw Error(ErrorCode::Config, "training needs at least two graphs");
  if (split.val.empty()) throw Error(ErrorCode::Config, "validation split is empty");

  int max_label = 0;
  for (const auto* part : {&split.train, &split.val, &split.test})
    for (const auto& r : *part) max_label = std::max(max_label, r.label);
  const gnn::GnnConfig mcfg =
      model_config(cfg, static_cast<int>(split.train.front().polyhedron.attr_dim()), max_label + 1);

  std::vector<int> per_class(static_cast<std::size_t>(mcfg.num_classes), 0);
  for (const auto& r : split.train)
    if (r.label >= 0 && r.label < mcfg.num_classes) ++per_class[static_cast<std::size_t>(r.label)];
  for (std::size_t c = 0; c < per_class.size(); ++c)
    if (per_class[c] == 0) throw Error(ErrorCode::Config, "class " + std::to_string(c) + " has no training example");

  const auto train_graphs = prepare_graphs(split.train, mcfg, cfg.mask_attributes);
  const auto val_graphs = prepare_graphs(split.val, mcfg, cfg.mask_attributes);

  gnn::PolyhedronGnn model(mcfg);
  nn::AdamState adam;
  nn::PlateauState plateau;
  plateau.factor = cfg.plateau_factor;
  plateau.patience = cfg.plateau_patience;
  plateau.min_lr = cfg.min_lr;
  plateau.lr = cfg.lr;
  std::mt19937_64 rng(data::derive_seed(cfg.seed, 0x5348554646ULL));

  TrainResult result;
  double best_acc = -1.0;
  int since_best = 0;
  std::vector<std::size_t> order(train_graphs.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = plateau.lr;
    double loss_sum = 0.0;
    for (const auto& [a, b] : batch_ranges(order.size(), static_cast<std::size_t>(cfg.batch_size), true)) {
      const std::span<const std::size_t> idx(order.data() + a, b - a);
      std::vector<int> labels;
      for (auto i : idx) labels.push_back(train_graphs[i].label);
      loss_sum += model.train_step(batch_of(train_graphs, idx), labels, adam, lr) * static_cast<double>(idx.size());
    }

    const ValResult val = validate(model, val_graphs, cfg.eval_batch_size);
    EpochLog entry{epoch, loss_sum / static_cast<double>(order.size()), val.loss, val.acc, lr};
    result.log.push_back(entry);
    if (progress) *progress << format_epoch(entry) << '\n';
    nn::plateau_step(plateau, val.loss);

    if (val.acc > best_acc) {
      best_acc = val.acc;
      since_best = 0;
      result.checkpoint = capture_checkpoint(model, cfg);
      result.checkpoint.adam = adam;
      result.checkpoint.plateau = plateau;
      result.checkpoint.epoch = epoch;
      result.checkpoint.best_epoch = epoch;
      result.checkpoint.best_val_acc = val.acc;
      result.checkpoint.rng_state = rng_state(rng);
    } else if (++since_best >= cfg.early_stop_patience) {
      break;
    }
  }
  return result;
}

nn::Matrix predict_logits(gnn::PolyhedronGnn& model, std::span<const PreparedGraph> graphs, int batch_size) {
  const auto classes = static_cast<std::size_t>(model.config().num_classes);
  nn::Matrix out(graphs.size(), classes);
  std::vector<std::size_t> idx(graphs.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (const auto& [a, b] : batch_ranges(graphs.size(), static_cast<std::size_t>(std::max(1, batch_size)), false)) {
    const auto res = model.forward(batch_of(graphs, std::span(idx).subspan(a, b - a)), nn::Mode::Eval, true);
    for (std::size_t r = 0; r < b - a; ++r) std::ranges::copy(res.logits.row(r), out.row(a + r).begin());
  }
  return out;
}

nn::Matrix embed_graphs(gnn::PolyhedronGnn& model, std::span<const PreparedGraph> graphs, int batch_size) {
  nn::Matrix out(graphs.size(), static_cast<std::size_t>(model.config().embedding_dim()));
  std::vector<std::size_t> idx(graphs.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (const auto& [a, b] : batch_ranges(graphs.size(), static_cast<std::size_t>(std::max(1, batch_size)), false)) {
    const auto emb = model.embed(batch_of(graphs, std::span(idx).subspan(a, b - a)));
    for (std::size_t r = 0; r < b - a; ++r) std::ranges::copy(emb.row(r), out.row(a + r).begin());
  }
  return out;
}

ClassificationMetrics evaluate_classification(gnn::PolyhedronGnn& model, std::span<const PreparedGraph> graphs,
                                              int batch_size) {
  std::vector<int> labels;
  for (const auto& g : graphs) labels.push_back(g.label);
  return classification_metrics(nn::softmax(predict_logits(model, graphs, batch_size)), labels);
}

RetrievalMetrics evaluate_retrieval(gnn::PolyhedronGnn& model, std::span<const PreparedGraph> graphs, int batch_size,
                                    Similarity similarity, std::vector<std::string>* warnings) {
  std::vector<int> labels;
  for (const auto& g : graphs) labels.push_back(g.label);
  return retrieval_metrics(embed_graphs(model, graphs, batch_size), labels, similarity, warnings);
}

}  // namespace polynet::harness
