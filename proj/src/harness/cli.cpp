#include "polynet/error.hpp"
#include "polynet/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

namespace polynet::harness {

namespace {

using nlohmann::json;

struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << text;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::RankDeficient:
    case ErrorCode::InconsistentRigidSet:
    case ErrorCode::Degenerate: return kExitNumerical;
    default: return kExitData;
  }
}

void print_flat(std::ostream& out, const json& j, const std::string& prefix = "") {
  for (const auto& [key, value] : j.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) print_flat(out, value, name);
    else if (value.is_string()) out << name << ": " << value.get<std::string>() << '\n';
    else out << name << ": " << value.dump() << '\n';
  }
}

json metrics_json(const ClassificationMetrics& m) {
  return {{"acc", m.acc}, {"precision", m.precision}, {"f1", m.f1}, {"auc", m.auc}};
}

json metrics_json(const RetrievalMetrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"map", m.map},
          {"ndcg", m.ndcg},           {"queries", m.queries}, {"skipped", m.skipped}};
}

json train_defaults(const TrainConfig& c) {
  return {{"lr", c.lr},
          {"max_epochs", c.max_epochs},
          {"early_stop_patience", c.early_stop_patience},
          {"plateau_factor", c.plateau_factor},
          {"plateau_patience", c.plateau_patience},
          {"min_lr", c.min_lr}};
}

struct EvalInputs {
  Checkpoint checkpoint;
  std::vector<PreparedGraph> graphs;
};

EvalInputs eval_inputs(const std::string& checkpoint_path, const std::string& config_path,
                       std::optional<std::uint64_t> seed) {
  EvalInputs in;
  in.checkpoint = load_checkpoint(checkpoint_path);
  TrainConfig cfg = in.checkpoint.config;
  if (!config_path.empty()) cfg.data = load_config(config_path).data;
  if (seed) cfg.seed = *seed;
  const auto split = load_split(cfg);
  in.graphs = prepare_graphs(split.test, in.checkpoint.model, cfg.mask_attributes);
  return in;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Polyhedron graph learning toolkit", "polynet"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "Print a JSON report on stdout");

  std::function<json()> action;
  const auto started = std::chrono::steady_clock::now();

  // build-dataset
  auto* build = app.add_subcommand("build-dataset", "Generate an extrusion or synthetic corpus");
  std::string build_kind = "synthetic", polygons_path, scheme_name = "digits", build_out;
  std::vector<std::string> solid_names{"tetrahedron", "cube", "prism"};
  double height = 1.0, jitter = 0.15;
  int per_class = 100;
  bool no_rotate = false;
  std::uint64_t build_seed = 0;
  build->add_option("--kind", build_kind)->check(CLI::IsMember({"synthetic", "extrusion"}));
  build->add_option("--polygons", polygons_path, "JSON-lines polygons (extrusion)");
  build->add_option("--height", height);
  build->add_option("--scheme", scheme_name)->check(CLI::IsMember({"digits", "none"}));
  build->add_option("--solids", solid_names)->delimiter(',');
  build->add_option("--per-class", per_class);
  build->add_option("--jitter", jitter);
  build->add_flag("--no-rotate", no_rotate);
  build->add_option("--seed", build_seed);
  build->add_option("--out", build_out)->required();
  build->callback([&] {
    action = [&]() -> json {
      std::vector<data::PolyhedronRecord> records;
      std::vector<std::string> log;
      if (build_kind == "extrusion") {
        if (polygons_path.empty()) throw CLI::ValidationError("--polygons", "required for --kind extrusion");
        std::istringstream polys(read_text(polygons_path));
        const auto polygons = data::read_polygons(polys);
        const ColorScheme scheme = scheme_name == "digits" ? ColorScheme::digits() : ColorScheme::none();
        records = data::build_extrusion_dataset(polygons, height, scheme, !no_rotate, build_seed, &log);
      } else {
        data::SyntheticOptions opts;
        opts.kinds.clear();
        for (const auto& name : solid_names) {
          if (name == "tetrahedron") opts.kinds.push_back(data::SolidKind::Tetrahedron);
          else if (name == "cube") opts.kinds.push_back(data::SolidKind::Cube);
          else if (name == "prism") opts.kinds.push_back(data::SolidKind::Prism);
          else if (name == "pyramid") opts.kinds.push_back(data::SolidKind::Pyramid);
          else throw CLI::ValidationError("--solids", "unknown solid '" + name + "'");
        }
        opts.per_class = per_class;
        opts.jitter = jitter;
        opts.rotate = !no_rotate;
        opts.seed = build_seed;
        records = data::synthetic_dataset(opts);
      }
      data::save_corpus(build_out, records);
      return {{"command", "build-dataset"}, {"records", records.size()}, {"skipped", log}, {"out", build_out}};
    };
  });

  // merge-obj
  auto* merge = app.add_subcommand("merge-obj", "Merge a triangle mesh into a polyhedron");
  std::string obj_path, mtl_path, merge_out, merge_id;
  data::MergeOptions merge_opts;
  int merge_label = 0;
  merge->add_option("obj", obj_path)->required();
  merge->add_option("--mtl", mtl_path);
  merge->add_option("--normal-tol", merge_opts.normal_tol);
  merge->add_option("--max-faces", merge_opts.max_faces);
  merge->add_option("--label", merge_label);
  merge->add_option("--id", merge_id);
  merge->add_option("--out", merge_out)->required();
  merge->callback([&] {
    action = [&]() -> json {
      const data::MaterialTable materials = mtl_path.empty() ? data::MaterialTable{} : data::load_mtl(mtl_path);
      const auto mesh = data::import_obj(obj_path, materials);
      const auto result = data::merge_coplanar_faces(mesh, merge_opts);
      if (!result.accepted()) throw Error(ErrorCode::InvalidPolyhedron, "rejected: " + result.rejection);
      data::PolyhedronRecord record{*result.polyhedron, merge_label, merge_id.empty() ? obj_path : merge_id};
      data::save_record(merge_out, record);
      return {{"command", "merge-obj"},
              {"triangles", mesh.triangles.size()},
              {"faces", record.polyhedron.faces.size()},
              {"out", merge_out}};
    };
  });

  // features
  auto* features = app.add_subcommand("features", "Export the rigid set of a polyhedron");
  std::string features_in, features_out;
  bool no_backtracking = false;
  features->add_option("polyhedron", features_in)->required();
  features->add_flag("--no-backtracking", no_backtracking);
  features->add_option("--out", features_out);
  features->callback([&] {
    action = [&]() -> json {
      const auto record = data::load_record(features_in);
      const RigidSet rigid = compute_rigid_set(build_sag(record.polyhedron), !no_backtracking);
      std::ostringstream text;
      write_rigid_set(text, rigid);
      json report{{"command", "features"}, {"paths", rigid.size()}};
      if (!features_out.empty()) {
        write_text(features_out, text.str());
        report["out"] = features_out;
      } else if (as_json) {
        report["rigid_set"] = text.str();
      } else {
        out << text.str();
        return json();
      }
      return report;
    };
  });

  // reconstruct
  auto* reconstruct = app.add_subcommand("reconstruct", "Rebuild a polyhedron from a rigid set and topology");
  std::string rigid_in, topology_in, reconstruct_out;
  reconstruct->add_option("rigid", rigid_in)->required();
  reconstruct->add_option("topology", topology_in)->required();
  reconstruct->add_option("--out", reconstruct_out);
  reconstruct->callback([&] {
    action = [&]() -> json {
      std::istringstream rigid_text(read_text(rigid_in));
      const RigidSet rigid = read_rigid_set(rigid_text);
      const SagTopology topology = data::decode_topology(read_text(topology_in));
      data::PolyhedronRecord record{reconstruct_polyhedron(rigid, topology), 0, "reconstructed"};
      const auto text = data::encode_record(record) + "\n";
      json report{{"command", "reconstruct"}, {"vertices", record.polyhedron.vertices.size()}};
      if (!reconstruct_out.empty()) {
        write_text(reconstruct_out, text);
        report["out"] = reconstruct_out;
      } else if (as_json) {
        report["polyhedron"] = json::parse(text);
      } else {
        out << text;
        return json();
      }
      return report;
    };
  });

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a classifier");
  std::string train_config, train_out = "model.ckpt", train_log;
  std::optional<std::uint64_t> train_seed;
  train_cmd->add_option("--config", train_config)->required();
  train_cmd->add_option("--seed", train_seed);
  train_cmd->add_option("--out", train_out);
  train_cmd->add_option("--log", train_log, "Write the epoch log here");
  train_cmd->callback([&] {
    action = [&]() -> json {
      TrainConfig cfg = load_config(train_config);
      if (train_seed) cfg.seed = *train_seed;
      const auto split = load_split(cfg);
      std::ofstream log_file;
      if (!train_log.empty()) {
        log_file.open(train_log);
        if (!log_file) throw Error(ErrorCode::Io, "cannot write " + train_log);
      }
      const auto result = train(cfg, split, train_log.empty() ? nullptr : &log_file);
      save_checkpoint(train_out, result.checkpoint);
      auto model = model_from_checkpoint(result.checkpoint);
      const auto test = prepare_graphs(split.test, result.checkpoint.model, cfg.mask_attributes);
      return {{"task", "train"},
              {"metrics",
               {{"epochs", result.log.size()},
                {"best_epoch", result.checkpoint.best_epoch},
                {"best_val_acc", result.checkpoint.best_val_acc},
                {"test", metrics_json(evaluate_classification(model, test, cfg.eval_batch_size))}}},
              {"defaults", train_defaults(cfg)},
              {"config_hash", config_hash(cfg)},
              {"seed", cfg.seed},
              {"out", train_out}};
    };
  });

  // eval / retrieve
  auto* eval_cmd = app.add_subcommand("eval", "Classification metrics on the test split");
  auto* retrieve_cmd = app.add_subcommand("retrieve", "Retrieval metrics on the test split");
  std::string eval_checkpoint, eval_config, similarity_name;
  std::optional<std::uint64_t> eval_seed;
  for (auto* sub : {eval_cmd, retrieve_cmd}) {
    sub->add_option("--checkpoint", eval_checkpoint)->required();
    sub->add_option("--config", eval_config, "Override the data path");
    sub->add_option("--seed", eval_seed);
  }
  retrieve_cmd->add_option("--similarity", similarity_name)->check(CLI::IsMember({"cosine", "euclidean"}));
  eval_cmd->callback([&] {
    action = [&]() -> json {
      auto in = eval_inputs(eval_checkpoint, eval_config, eval_seed);
      auto model = model_from_checkpoint(in.checkpoint);
      const auto m = evaluate_classification(model, in.graphs, in.checkpoint.config.eval_batch_size);
      return {{"task", "classification"},
              {"metrics", metrics_json(m)},
              {"defaults", train_defaults(in.checkpoint.config)},
              {"config_hash", config_hash(in.checkpoint.config)},
              {"seed", eval_seed.value_or(in.checkpoint.config.seed)}};
    };
  });
  retrieve_cmd->callback([&] {
    action = [&]() -> json {
      auto in = eval_inputs(eval_checkpoint, eval_config, eval_seed);
      auto model = model_from_checkpoint(in.checkpoint);
      Similarity sim = in.checkpoint.config.similarity;
      if (!similarity_name.empty()) sim = similarity_name == "cosine" ? Similarity::Cosine : Similarity::Euclidean;
      std::vector<std::string> warnings;
      const auto m = evaluate_retrieval(model, in.graphs, in.checkpoint.config.eval_batch_size, sim, &warnings);
      return {{"task", "retrieval"},
              {"metrics", metrics_json(m)},
              {"similarity", sim == Similarity::Cosine ? "cosine" : "euclidean"},
              {"warnings", warnings},
              {"config_hash", config_hash(in.checkpoint.config)},
              {"seed", eval_seed.value_or(in.checkpoint.config.seed)}};
    };
  });

  // gradcheck
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of the full model");
  gnn::GnnConfig grad_cfg;
  grad_cfg.hidden = 4;
  grad_cfg.attr_dim = 3;
  double grad_tol = 1e-4;
  std::uint64_t grad_seed = 0;
  gradcheck->add_option("--hidden", grad_cfg.hidden);
  gradcheck->add_option("--layers", grad_cfg.layers);
  gradcheck->add_option("--attr-dim", grad_cfg.attr_dim);
  gradcheck->add_option("--tol", grad_tol);
  gradcheck->add_option("--seed", grad_seed);
  bool grad_train_mode = false;
  gradcheck->add_flag("--train-mode", grad_train_mode, "Use batch statistics (degenerate for two graphs)");
  gradcheck->callback([&] {
    action = [&]() -> json {
      grad_cfg.seed = grad_seed;
      const auto r = model_grad_check(grad_cfg, grad_seed, grad_train_mode ? nn::Mode::Train : nn::Mode::Eval);
      json report{{"command", "gradcheck"},
                  {"max_rel_error", r.max_rel_error},
                  {"checked", r.checked},
                  {"worst", r.worst},
                  {"tolerance", grad_tol},
                  {"mode", grad_train_mode ? "train" : "eval"},
                  {"seed", grad_seed}};
      if (!(r.max_rel_error < grad_tol)) throw NumericalFailure(report.dump());
      return report;
    };
  });

  // invariance-check
  auto* invariance = app.add_subcommand("invariance-check", "Rigid-motion invariance of features and embeddings");
  int trials = 100;
  std::uint64_t inv_seed = 0;
  double rigid_tol = 1e-9, embed_tol = 1e-6;
  invariance->add_option("--trials", trials);
  invariance->add_option("--seed", inv_seed);
  invariance->add_option("--tol", rigid_tol);
  invariance->add_option("--embed-tol", embed_tol);
  invariance->callback([&] {
    action = [&]() -> json {
      const auto r = invariance_check(trials, inv_seed);
      json report{{"command", "invariance-check"},
                  {"trials", r.trials},
                  {"max_rigid_deviation", r.max_rigid_deviation},
                  {"max_embedding_deviation", r.max_embedding_deviation},
                  {"seed", inv_seed}};
      if (!(r.max_rigid_deviation <= rigid_tol && r.max_embedding_deviation <= embed_tol))
        throw NumericalFailure(report.dump());
      return report;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    json report = action();
    if (report.is_null()) return kExitOk;
    if (report.contains("task"))
      report["runtime_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (as_json) out << report.dump(2) << '\n';
    else print_flat(out, report);
    return kExitOk;
  } catch (const CLI::Error& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalFailure& e) {
    if (as_json) out << json::parse(e.what()).dump(2) << '\n';
    err << "numerical check failed: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace polynet::harness
