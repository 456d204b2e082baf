#include "polynet/harness.hpp"

#include "support.hpp"

#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

using namespace polynet;
using harness::run_cli;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "polynet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

struct Scratch {
  fs::path dir = fs::temp_directory_path() / ("polynet_cli_" + std::to_string(::getpid()));
  Scratch() { fs::create_directories(dir); }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("usage errors") {
  CHECK(cli({}).code == harness::kExitUsage);
  CHECK(cli({"frobnicate"}).code == harness::kExitUsage);
  CHECK(cli({"train", "--config", "a.json", "--bogus"}).code == harness::kExitUsage);
  CHECK(cli({"train"}).code == harness::kExitUsage);
  CHECK(cli({"--help"}).code == harness::kExitOk);
}

TEST_CASE("missing files are data errors") {
  CHECK(cli({"train", "--config", "missing.json"}).code == harness::kExitData);
  CHECK(cli({"features", "missing.json"}).code == harness::kExitData);
  CHECK(cli({"eval", "--checkpoint", "missing.ckpt"}).code == harness::kExitData);
}

TEST_CASE("features and reconstruct") {
  Scratch s;
  data::save_record(s / "cube.json", {data::unit_cube(), 0, "cube"});
  const Run f = cli({"features", s / "cube.json"});
  CHECK(f.code == 0);
  CHECK(count_lines(f.out) == 72);
  CHECK(cli({"features", s / "cube.json", "--no-backtracking", "--out", s / "inner.txt"}).code == 0);

  REQUIRE(cli({"features", s / "cube.json", "--out", s / "cube.rigid"}).code == 0);
  {
    std::ofstream t(s / "cube.topo.json");
    t << data::encode_topology(data::unit_cube());
  }
  const Run r = cli({"reconstruct", s / "cube.rigid", s / "cube.topo.json", "--out", s / "back.json"});
  CHECK(r.code == 0);
  const auto back = data::load_record(s / "back.json");
  CHECK(kabsch_align(back.polyhedron.vertices, data::unit_cube().vertices).rmsd < 1e-9);

  // Topology without the hinge tuples cannot be glued.
  const Run bad = cli({"reconstruct", s / "inner.txt", s / "cube.topo.json"});
  CHECK(bad.code == harness::kExitData);
}

TEST_CASE("merge-obj") {
  Scratch s;
  const auto mesh = data::triangulate(data::unit_cube());
  {
    std::ofstream obj(s / "cube.obj");
    for (const auto& v : mesh.vertices) obj << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    for (const auto& t : mesh.triangles) obj << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  }
  const Run r = cli({"--json", "merge-obj", s / "cube.obj", "--out", s / "merged.json", "--label", "2"});
  CHECK(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["faces"] == 6);
  const auto rec = data::load_record(s / "merged.json");
  CHECK(rec.label == 2);
  CHECK(rec.polyhedron.faces.size() == 6);
  CHECK(cli({"merge-obj", s / "cube.obj", "--max-faces", "5", "--out", s / "x.json"}).code == harness::kExitData);
}

TEST_CASE("dataset, train, eval and retrieve") {
  Scratch s;
  CHECK(cli({"build-dataset", "--kind", "synthetic", "--solids", "tetrahedron,cube", "--per-class", "8", "--seed",
             "2", "--out", s / "corpus.jsonl"})
            .code == 0);
  CHECK(data::load_corpus(s / "corpus.jsonl").size() == 16);
  {
    std::ofstream c(s / "config.json");
    c << R"({"data": "corpus.jsonl", "hidden": 8, "layers": 1, "max_epochs": 2, "batch_size": 4, "seed": 3})";
  }
  const Run t = cli({"--json", "train", "--config", s / "config.json", "--out", s / "m.ckpt", "--log", s / "log.txt"});
  REQUIRE(t.code == 0);
  const auto report = nlohmann::json::parse(t.out);
  CHECK(report["task"] == "train");
  CHECK(report.contains("config_hash"));
  CHECK(report.contains("runtime_s"));
  CHECK(report["seed"] == 3);

  std::ifstream log(s / "log.txt");
  std::string line;
  std::size_t epochs = 0;
  while (std::getline(log, line)) epochs += line.rfind("epoch ", 0) == 0;
  CHECK(epochs == 2);

  const Run e = cli({"--json", "eval", "--checkpoint", s / "m.ckpt"});
  REQUIRE(e.code == 0);
  const auto metrics = nlohmann::json::parse(e.out)["metrics"];
  for (const char* key : {"acc", "precision", "f1", "auc"}) CHECK(metrics.contains(key));

  const Run q = cli({"--json", "retrieve", "--checkpoint", s / "m.ckpt", "--similarity", "euclidean"});
  REQUIRE(q.code == 0);
  CHECK(nlohmann::json::parse(q.out)["metrics"].contains("ndcg"));
  CHECK(cli({"retrieve", "--checkpoint", s / "m.ckpt", "--similarity", "manhattan"}).code == harness::kExitUsage);
}

TEST_CASE("self checks") {
  const Run g = cli({"--json", "gradcheck"});
  CHECK(g.code == 0);
  CHECK(nlohmann::json::parse(g.out)["max_rel_error"].get<double>() < 1e-4);
  CHECK(cli({"gradcheck", "--tol", "1e-30"}).code == harness::kExitNumerical);

  const Run inv = cli({"--json", "invariance-check", "--trials", "100"});
  CHECK(inv.code == 0);
  const auto j = nlohmann::json::parse(inv.out);
  CHECK(j["max_rigid_deviation"].get<double>() < 1e-9);
  CHECK(j["max_embedding_deviation"].get<double>() < 1e-6);
}
