#include "polynet/data.hpp"
#include "polynet/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <numeric>
#include <random>

namespace polynet::data {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over a Weyl step
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<LabeledPolygon> read_polygons(std::istream& is) {
  std::vector<LabeledPolygon> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::Schema, where + ": malformed JSON: " + e.what());
    }
    const auto poly = doc.find("polygon");
    if (poly == doc.end() || !poly->is_array()) throw Error(ErrorCode::Schema, where + ": polygon: missing or not an array");
    LabeledPolygon p;
    for (std::size_t v = 0; v < poly->size(); ++v) {
      const auto& xy = (*poly)[v];
      if (!xy.is_array() || xy.size() != 2 || !xy[0].is_number() || !xy[1].is_number())
        throw Error(ErrorCode::Schema, where + ": polygon[" + std::to_string(v) + "]: expected [x, y]");
      p.vertices.emplace_back(xy[0].get<double>(), xy[1].get<double>());
    }
    if (const auto it = doc.find("label"); it != doc.end()) {
      if (!it->is_number_integer()) throw Error(ErrorCode::Schema, where + ": label: expected an integer");
      p.label = it->get<int>();
    }
    if (const auto it = doc.find("id"); it != doc.end() && it->is_string()) p.id = it->get<std::string>();
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PolyhedronRecord> build_extrusion_dataset(std::span<const LabeledPolygon> polygons, double height,
                                                      const ColorScheme& scheme, bool rotate, std::uint64_t seed,
                                                      std::vector<std::string>* log) {
  std::vector<PolyhedronRecord> out;
  for (std::size_t i = 0; i < polygons.size(); ++i) {
    const auto& src = polygons[i];
    const std::string id = src.id.empty() ? "polygon-" + std::to_string(i) : src.id;
    PolyhedronRecord record;
    try {
      record.polyhedron = extrude_polygon(src.vertices, height, scheme);
    } catch (const Error& e) {
      if (log) log->push_back("skipped " + id + ": " + e.what());
      continue;
    }
    if (rotate) record.polyhedron = apply_rigid_transform(record.polyhedron, sample_random_rotation(derive_seed(seed, i)));
    record.label = src.label;
    record.id = id;
    out.push_back(std::move(record));
  }
  return out;
}

SplitIndices split_indices(std::size_t count, std::uint64_t seed) {
  if (count < 5) throw Error(ErrorCode::Config, "a split needs at least 5 records, got " + std::to_string(count));
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t n_train = count * 60 / 100;
  const std::size_t n_val = count * 20 / 100;
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                 order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return out;
}

}  // namespace polynet::data
