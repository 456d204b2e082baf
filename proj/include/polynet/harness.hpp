#pragma once

#include "polynet/data.hpp"
#include "polynet/gnn.hpp"
#include "polynet/nn/optim.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace polynet::harness {

// ---- metrics ---------------------------------------------------------------

struct ClassificationMetrics {
  double acc = 0.0;
  double precision = 0.0;  // support-weighted
  double f1 = 0.0;         // support-weighted
  double auc = 0.0;        // support-weighted one-vs-rest
};

// Area under the ROC curve of `scores` for the positive items, with tied
// scores counted as half (midrank Mann-Whitney). Throws Undefined when either
// class is empty.
double binary_auc(std::span<const double> scores, std::span<const bool> positive);

// `probs`: one row of class scores per item. Throws Undefined when the labels
// contain fewer than two classes.
ClassificationMetrics classification_metrics(const nn::Matrix& probs, const std::vector<int>& labels);

enum class Similarity { Cosine, Euclidean };

struct RetrievalMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double map = 0.0;
  double ndcg = 0.0;
  int queries = 0;
  int skipped = 0;  // items alone in their class
};

// Binary relevance of a full ranking.
double average_precision(std::span<const bool> ranked_relevance);
double ndcg_at(std::span<const bool> ranked_relevance, std::size_t k);

// Ranks every other item per query (ties broken by lower index) and averages
// over queries whose class has at least two members.
RetrievalMetrics retrieval_metrics(const nn::Matrix& embeddings, const std::vector<int>& labels,
                                   Similarity similarity = Similarity::Cosine,
                                   std::vector<std::string>* warnings = nullptr);

// ---- configuration ---------------------------------------------------------

struct TrainConfig {
  std::string data;  // corpus or manifest, split 60/20/20 by `seed`
  int hidden = 64;
  int layers = 2;
  int attr_dim = -1;     // -1: from the data
  int num_classes = -1;  // -1: max label + 1
  double lr = 1e-3;
  int batch_size = 32;
  int eval_batch_size = 8;
  int max_epochs = 500;
  int early_stop_patience = 50;  // epochs without a better validation accuracy
  double plateau_factor = 0.5;
  int plateau_patience = 10;
  double min_lr = 1e-6;
  std::uint64_t seed = 0;
  gnn::AttrOrientation attr_orientation = gnn::AttrOrientation::Reversed;
  bool include_backtracking = true;
  bool mask_attributes = false;
  Similarity similarity = Similarity::Cosine;

  void check() const;
};

// Unknown keys and wrong types throw Config.
TrainConfig config_from_json(std::string_view text);
std::string config_to_json(const TrainConfig& cfg);
// Reads a config file; a relative `data` path resolves against its directory.
TrainConfig load_config(const std::filesystem::path& path);
// 16 hex digits of FNV-1a over the canonical JSON.
std::string config_hash(const TrainConfig& cfg);

gnn::GnnConfig model_config(const TrainConfig& cfg, int attr_dim, int num_classes);

// ---- checkpoints -----------------------------------------------------------

struct Checkpoint {
  TrainConfig config;
  gnn::GnnConfig model;
  std::vector<std::string> param_names;
  std::vector<nn::Matrix> params;
  std::vector<nn::Matrix> buffers;
  nn::AdamState adam;
  nn::PlateauState plateau;
  int epoch = 0;
  int best_epoch = 0;
  double best_val_acc = 0.0;
  std::string rng_state;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

Checkpoint capture_checkpoint(gnn::PolyhedronGnn& model, const TrainConfig& cfg);
// Throws Dimension when tensor shapes disagree with the model.
void restore_model(const Checkpoint& ck, gnn::PolyhedronGnn& model);
gnn::PolyhedronGnn model_from_checkpoint(const Checkpoint& ck);

// Layout: magic, version, payload, payload length, crc32 of all prior bytes.
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck);
// Throws Integrity (truncated or corrupted) or Version.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// ---- training and evaluation -----------------------------------------------

struct PreparedGraph {
  gnn::GraphFeatures features;
  int label = 0;
  std::string id;
};

std::vector<PreparedGraph> prepare_graphs(std::span<const data::PolyhedronRecord> records, const gnn::GnnConfig& cfg,
                                          bool mask_attributes);

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  double lr = 0.0;
};

std::string format_epoch(const EpochLog& e);

struct TrainResult {
  Checkpoint checkpoint;  // best validation epoch
  std::vector<EpochLog> log;
};

// Throws Config when a class has no training example.
TrainResult train(const TrainConfig& cfg, const data::Split<data::PolyhedronRecord>& split,
                  std::ostream* progress = nullptr);
// Loads cfg.data and splits it with cfg.seed.
data::Split<data::PolyhedronRecord> load_split(const TrainConfig& cfg);

nn::Matrix predict_logits(gnn::PolyhedronGnn& model, std::span<const PreparedGraph> graphs, int batch_size);
nn::Matrix embed_graphs(gnn::PolyhedronGnn& model, std::span<const PreparedGraph> graphs, int batch_size);

ClassificationMetrics evaluate_classification(gnn::PolyhedronGnn& model, std::span<const PreparedGraph> graphs,
                                              int batch_size);
RetrievalMetrics evaluate_retrieval(gnn::PolyhedronGnn& model, std::span<const PreparedGraph> graphs, int batch_size,
                                    Similarity similarity, std::vector<std::string>* warnings = nullptr);

// ---- self checks -----------------------------------------------------------

// Full-model gradient check on a two-graph batch (a tetrahedron and a cube
// with random face attributes when cfg.attr_dim > 0). In train mode the
// classifier's batch norm sees two rows, which makes everything upstream of
// it nearly constant; eval mode exercises every parameter. Parameters are
// perturbed slightly first so no unit starts exactly on a ReLU kink.
nn::GradCheckResult model_grad_check(const gnn::GnnConfig& cfg, std::uint64_t seed, nn::Mode mode = nn::Mode::Eval);

struct InvarianceReport {
  int trials = 0;
  double max_rigid_deviation = 0.0;      // wrap-aware, over all keyed tuples
  double max_embedding_deviation = 0.0;  // relative L2, eval mode
};

// Random solids under random rotations and translations.
InvarianceReport invariance_check(int trials, std::uint64_t seed);

// ---- command line ----------------------------------------------------------

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumerical = 3 };

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace polynet::harness
