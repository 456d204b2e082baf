#include "polynet/error.hpp"
#include "polynet/harness.hpp"

#include <json.hpp>
#include <zlib.h>

#include <cstring>
#include <fstream>
#include <iterator>

namespace polynet::harness {

namespace {

constexpr char kMagic[4] = {'P', 'N', 'C', 'K'};

class Writer {
 public:
  template <typename T>
  void pod(T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    bytes.insert(bytes.end(), p, p + sizeof(T));
  }
  void str(const std::string& s) {
    pod<std::uint64_t>(s.size());
    bytes.insert(bytes.end(), s.begin(), s.end());
  }
  void matrix(const nn::Matrix& m) {
    pod<std::uint64_t>(m.rows());
    pod<std::uint64_t>(m.cols());
    const auto* p = reinterpret_cast<const std::uint8_t*>(m.data());
    bytes.insert(bytes.end(), p, p + m.size() * sizeof(double));
  }
  void matrices(const std::vector<nn::Matrix>& ms) {
    pod<std::uint64_t>(ms.size());
    for (const auto& m : ms) matrix(m);
  }

  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}

  template <typename T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint64_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  nn::Matrix matrix() {
    const auto rows = pod<std::uint64_t>();
    const auto cols = pod<std::uint64_t>();
    if (cols != 0 && rows > (bytes_.size() - pos_) / cols / sizeof(double)) throw Error(ErrorCode::Integrity, "tensor overruns file");
    nn::Matrix m(rows, cols);
    need(m.size() * sizeof(double));
    std::memcpy(m.data(), bytes_.data() + pos_, m.size() * sizeof(double));
    pos_ += m.size() * sizeof(double);
    return m;
  }
  std::vector<nn::Matrix> matrices() {
    const auto n = pod<std::uint64_t>();
    if (n > bytes_.size()) throw Error(ErrorCode::Integrity, "tensor count overruns file");
    std::vector<nn::Matrix> out;
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(matrix());
    return out;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (n > bytes_.size() - pos_) throw Error(ErrorCode::Integrity, "checkpoint is truncated");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

nlohmann::json model_document(const gnn::GnnConfig& m) {
  return {{"layers", m.layers},
          {"hidden", m.hidden},
          {"attr_dim", m.attr_dim},
          {"num_classes", m.num_classes},
          {"include_backtracking", m.include_backtracking},
          {"attr_edge_orientation", m.attr_orientation == gnn::AttrOrientation::Reversed ? "reversed" : "forward"},
          {"seed", m.seed}};
}

gnn::GnnConfig model_from_document(const nlohmann::json& j) {
  gnn::GnnConfig m;
  m.layers = j.at("layers").get<int>();
  m.hidden = j.at("hidden").get<int>();
  m.attr_dim = j.at("attr_dim").get<int>();
  m.num_classes = j.at("num_classes").get<int>();
  m.include_backtracking = j.at("include_backtracking").get<bool>();
  m.attr_orientation = j.at("attr_edge_orientation").get<std::string>() == "reversed" ? gnn::AttrOrientation::Reversed
                                                                                       : gnn::AttrOrientation::Forward;
  m.seed = j.at("seed").get<std::uint64_t>();
  return m;
}

std::uint32_t crc(std::span<const std::uint8_t> bytes) {
  uLong c = crc32(0L, Z_NULL, 0);
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
    c = crc32(c, bytes.data() + off, chunk);
    off += chunk;
  }
  return static_cast<std::uint32_t>(c);
}

}  // namespace

Checkpoint capture_checkpoint(gnn::PolyhedronGnn& model, const TrainConfig& cfg) {
  Checkpoint ck;
  ck.config = cfg;
  ck.model = model.config();
  for (nn::Parameter* p : model.parameters()) {
    ck.param_names.push_back(p->name);
    ck.params.push_back(p->value);
  }
  for (nn::Matrix* b : model.buffers()) ck.buffers.push_back(*b);
  return ck;
}

void restore_model(const Checkpoint& ck, gnn::PolyhedronGnn& model) {
  const auto params = model.parameters();
  const auto buffers = model.buffers();
  if (params.size() != ck.params.size() || buffers.size() != ck.buffers.size())
    throw Error(ErrorCode::Dimension, "checkpoint holds " + std::to_string(ck.params.size()) +
                                          " parameter tensors, model has " + std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->value.same_shape(ck.params[i]))
      throw Error(ErrorCode::Dimension, "shape mismatch for " + params[i]->name + ": checkpoint " +
                                            std::to_string(ck.params[i].rows()) + "x" + std::to_string(ck.params[i].cols()) +
                                            ", model " + std::to_string(params[i]->value.rows()) + "x" +
                                            std::to_string(params[i]->value.cols()));
    params[i]->value = ck.params[i];
  }
  for (std::size_t i = 0; i < buffers.size(); ++i) {
    if (!buffers[i]->same_shape(ck.buffers[i])) throw Error(ErrorCode::Dimension, "batch-norm statistics shape mismatch");
    *buffers[i] = ck.buffers[i];
  }
}

gnn::PolyhedronGnn model_from_checkpoint(const Checkpoint& ck) {
  gnn::PolyhedronGnn model(ck.model);
  restore_model(ck, model);
  return model;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck) {
  Writer w;
  w.bytes.insert(w.bytes.end(), std::begin(kMagic), std::end(kMagic));
  w.pod<std::uint32_t>(kCheckpointVersion);
  const std::size_t payload_start = w.bytes.size();

  const nlohmann::json config = {{"train", nlohmann::json::parse(config_to_json(ck.config))},
                                 {"model", model_document(ck.model)}};
  w.str(config.dump());
  w.pod<std::uint64_t>(ck.param_names.size());
  for (const auto& n : ck.param_names) w.str(n);
  w.matrices(ck.params);
  w.matrices(ck.buffers);

  w.pod(ck.adam.beta1);
  w.pod(ck.adam.beta2);
  w.pod(ck.adam.eps);
  w.pod<std::int64_t>(ck.adam.step);
  w.matrices(ck.adam.m);
  w.matrices(ck.adam.v);

  w.pod(ck.plateau.factor);
  w.pod<std::int32_t>(ck.plateau.patience);
  w.pod(ck.plateau.min_lr);
  w.pod(ck.plateau.lr);
  w.pod(ck.plateau.best);
  w.pod<std::int32_t>(ck.plateau.bad_epochs);

  w.pod<std::int32_t>(ck.epoch);
  w.pod<std::int32_t>(ck.best_epoch);
  w.pod(ck.best_val_acc);
  w.str(ck.rng_state);

  w.pod<std::uint64_t>(w.bytes.size() - payload_start);
  w.pod<std::uint32_t>(crc(w.bytes));
  return std::move(w.bytes);
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t header = sizeof kMagic + sizeof(std::uint32_t);
  constexpr std::size_t trailer = sizeof(std::uint64_t) + sizeof(std::uint32_t);
  if (bytes.size() < header + trailer) throw Error(ErrorCode::Integrity, "checkpoint is truncated");

  std::uint32_t stored_crc = 0;
  std::uint64_t stored_len = 0;
  std::memcpy(&stored_crc, bytes.data() + bytes.size() - sizeof stored_crc, sizeof stored_crc);
  std::memcpy(&stored_len, bytes.data() + bytes.size() - trailer, sizeof stored_len);
  if (stored_len != bytes.size() - header - trailer)
    throw Error(ErrorCode::Integrity, "checkpoint length mismatch (truncated or padded file)");
  if (crc(bytes.first(bytes.size() - sizeof stored_crc)) != stored_crc)
    throw Error(ErrorCode::Integrity, "checkpoint digest mismatch");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) throw Error(ErrorCode::Integrity, "not a checkpoint file");

  Reader r(bytes.subspan(sizeof kMagic, bytes.size() - sizeof kMagic - trailer));
  const auto version = r.pod<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw Error(ErrorCode::Version, "checkpoint version " + std::to_string(version) + ", expected " +
                                        std::to_string(kCheckpointVersion));

  Checkpoint ck;
  try {
    const auto config = nlohmann::json::parse(r.str());
    ck.config = config_from_json(config.at("train").dump());
    ck.model = model_from_document(config.at("model"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Integrity, std::string("checkpoint config is unreadable: ") + e.what());
  }
  const auto names = r.pod<std::uint64_t>();
  if (names > bytes.size()) throw Error(ErrorCode::Integrity, "name count overruns file");
  for (std::uint64_t i = 0; i < names; ++i) ck.param_names.push_back(r.str());
  ck.params = r.matrices();
  ck.buffers = r.matrices();

  ck.adam.beta1 = r.pod<double>();
  ck.adam.beta2 = r.pod<double>();
  ck.adam.eps = r.pod<double>();
  ck.adam.step = r.pod<std::int64_t>();
  ck.adam.m = r.matrices();
  ck.adam.v = r.matrices();

  ck.plateau.factor = r.pod<double>();
  ck.plateau.patience = r.pod<std::int32_t>();
  ck.plateau.min_lr = r.pod<double>();
  ck.plateau.lr = r.pod<double>();
  ck.plateau.best = r.pod<double>();
  ck.plateau.bad_epochs = r.pod<std::int32_t>();

  ck.epoch = r.pod<std::int32_t>();
  ck.best_epoch = r.pod<std::int32_t>();
  ck.best_val_acc = r.pod<double>();
  ck.rng_state = r.str();
  if (!r.done()) throw Error(ErrorCode::Integrity, "trailing bytes in checkpoint");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  const auto bytes = encode_checkpoint(ck);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace polynet::harness
