#include "polynet/error.hpp"
#include "polynet/harness.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace polynet::harness {

using nlohmann::json;

namespace {

json to_document(const TrainConfig& c) {
  json j;
  j["data"] = c.data;
  j["hidden"] = c.hidden;
  j["layers"] = c.layers;
  j["attr_dim"] = c.attr_dim;
  j["num_classes"] = c.num_classes;
  j["lr"] = c.lr;
  j["batch_size"] = c.batch_size;
  j["eval_batch_size"] = c.eval_batch_size;
  j["max_epochs"] = c.max_epochs;
  j["early_stop_patience"] = c.early_stop_patience;
  j["plateau_factor"] = c.plateau_factor;
  j["plateau_patience"] = c.plateau_patience;
  j["min_lr"] = c.min_lr;
  j["seed"] = c.seed;
  j["attr_edge_orientation"] = c.attr_orientation == gnn::AttrOrientation::Reversed ? "reversed" : "forward";
  j["include_backtracking"] = c.include_backtracking;
  j["mask_attributes"] = c.mask_attributes;
  j["similarity"] = c.similarity == Similarity::Cosine ? "cosine" : "euclidean";
  return j;
}

template <typename T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::Config, "config key '" + key + "' has the wrong type");
  }
}

}  // namespace

void TrainConfig::check() const {
  if (hidden < 1 || layers < 1) throw Error(ErrorCode::Config, "hidden and layers must be positive");
  if (!(lr >= 0.0)) throw Error(ErrorCode::Config, "lr must be non-negative");
  if (batch_size < 2) throw Error(ErrorCode::Config, "batch_size must be at least 2 (batch normalization)");
  if (eval_batch_size < 1) throw Error(ErrorCode::Config, "eval_batch_size must be positive");
  if (max_epochs < 1) throw Error(ErrorCode::Config, "max_epochs must be positive");
  if (early_stop_patience < 1 || plateau_patience < 1) throw Error(ErrorCode::Config, "patience must be positive");
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0)) throw Error(ErrorCode::Config, "plateau_factor must be in (0, 1)");
}

TrainConfig config_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Config, std::string("malformed config: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::Config, "config must be a JSON object");

  TrainConfig c;
  for (const auto& [key, v] : doc.items()) {
    if (key == "data") c.data = get_as<std::string>(v, key);
    else if (key == "hidden") c.hidden = get_as<int>(v, key);
    else if (key == "layers") c.layers = get_as<int>(v, key);
    else if (key == "attr_dim") c.attr_dim = get_as<int>(v, key);
    else if (key == "num_classes") c.num_classes = get_as<int>(v, key);
    else if (key == "lr") c.lr = get_as<double>(v, key);
    else if (key == "batch_size") c.batch_size = get_as<int>(v, key);
    else if (key == "eval_batch_size") c.eval_batch_size = get_as<int>(v, key);
    else if (key == "max_epochs") c.max_epochs = get_as<int>(v, key);
    else if (key == "early_stop_patience") c.early_stop_patience = get_as<int>(v, key);
    else if (key == "plateau_factor") c.plateau_factor = get_as<double>(v, key);
    else if (key == "plateau_patience") c.plateau_patience = get_as<int>(v, key);
    else if (key == "min_lr") c.min_lr = get_as<double>(v, key);
    else if (key == "seed") c.seed = get_as<std::uint64_t>(v, key);
    else if (key == "include_backtracking") c.include_backtracking = get_as<bool>(v, key);
    else if (key == "mask_attributes") c.mask_attributes = get_as<bool>(v, key);
    else if (key == "attr_edge_orientation") {
      const auto s = get_as<std::string>(v, key);
      if (s == "reversed") c.attr_orientation = gnn::AttrOrientation::Reversed;
      else if (s == "forward") c.attr_orientation = gnn::AttrOrientation::Forward;
      else throw Error(ErrorCode::Config, "attr_edge_orientation must be 'reversed' or 'forward'");
    } else if (key == "similarity") {
      const auto s = get_as<std::string>(v, key);
      if (s == "cosine") c.similarity = Similarity::Cosine;
      else if (s == "euclidean") c.similarity = Similarity::Euclidean;
      else throw Error(ErrorCode::Config, "similarity must be 'cosine' or 'euclidean'");
    } else {
      throw Error(ErrorCode::Config, "unknown config key '" + key + "'");
    }
  }
  c.check();
  return c;
}

std::string config_to_json(const TrainConfig& cfg) { return to_document(cfg).dump(); }

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  TrainConfig c = config_from_json(buffer.str());
  if (!c.data.empty() && std::filesystem::path(c.data).is_relative())
    c.data = (path.parent_path() / c.data).lexically_normal().string();
  return c;
}

std::string config_hash(const TrainConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config_to_json(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

gnn::GnnConfig model_config(const TrainConfig& cfg, int attr_dim, int num_classes) {
  gnn::GnnConfig m;
  m.layers = cfg.layers;
  m.hidden = cfg.hidden;
  m.attr_dim = cfg.attr_dim >= 0 ? cfg.attr_dim : attr_dim;
  m.num_classes = cfg.num_classes >= 1 ? cfg.num_classes : num_classes;
  m.include_backtracking = cfg.include_backtracking;
  m.attr_orientation = cfg.attr_orientation;
  m.seed = cfg.seed;
  m.check();
  return m;
}

}  // namespace polynet::harness
