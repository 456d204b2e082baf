#include "polynet/data.hpp"
#include "polynet/error.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace polynet::data {

using nlohmann::json;

namespace {

void append_real(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  out += buf;
}

void append_reals(std::string& out, std::span<const double> values) {
  out += '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    append_real(out, values[i]);
  }
  out += ']';
}

void append_faces(std::string& out, const std::vector<PolygonFace>& faces) {
  out += "\"faces\":[";
  for (std::size_t f = 0; f < faces.size(); ++f) {
    if (f) out += ',';
    out += "{\"loop\":[";
    for (std::size_t a = 0; a < faces[f].loop.size(); ++a) {
      if (a) out += ',';
      out += std::to_string(faces[f].loop[a]);
    }
    out += "],\"attr\":";
    append_reals(out, faces[f].attr);
    out += '}';
  }
  out += ']';
}

[[noreturn]] void schema(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::Schema, where + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) schema(where.empty() ? key : where + "." + key, "missing");
  return *it;
}

double read_number(const json& v, const std::string& where) {
  if (!v.is_number()) schema(where, "expected a number");
  return v.get<double>();
}

int read_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) schema(where, "expected an integer");
  return v.get<int>();
}

json parse_document(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Schema, std::string("malformed JSON: ") + e.what());
  }
}

std::vector<PolygonFace> read_faces(const json& doc, std::optional<std::size_t> attr_dim) {
  const json& faces = field(doc, "faces", "");
  if (!faces.is_array()) schema("faces", "expected an array");
  std::vector<PolygonFace> out;
  out.reserve(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const std::string where = "faces[" + std::to_string(f) + "]";
    const json& face = faces[f];
    if (!face.is_object()) schema(where, "expected an object");
    const json& loop = field(face, "loop", where);
    if (!loop.is_array()) schema(where + ".loop", "expected an array");
    PolygonFace pf;
    for (std::size_t a = 0; a < loop.size(); ++a)
      pf.loop.push_back(read_int(loop[a], where + ".loop[" + std::to_string(a) + "]"));
    if (const auto it = face.find("attr"); it != face.end()) {
      if (!it->is_array()) schema(where + ".attr", "expected an array");
      for (std::size_t a = 0; a < it->size(); ++a)
        pf.attr.push_back(read_number((*it)[a], where + ".attr[" + std::to_string(a) + "]"));
    }
    const std::size_t expected = attr_dim ? *attr_dim : (out.empty() ? pf.attr.size() : out.front().attr.size());
    if (pf.attr.size() != expected)
      throw Error(ErrorCode::Dimension, where + ".attr has length " + std::to_string(pf.attr.size()) + ", expected " +
                                            std::to_string(expected));
    out.push_back(std::move(pf));
  }
  return out;
}

}  // namespace

std::string encode_record(const PolyhedronRecord& record) {
  std::string out = "{\"vertices\":[";
  const auto& vs = record.polyhedron.vertices;
  for (std::size_t v = 0; v < vs.size(); ++v) {
    if (v) out += ',';
    const std::array<double, 3> xyz{vs[v].x(), vs[v].y(), vs[v].z()};
    append_reals(out, xyz);
  }
  out += "],";
  append_faces(out, record.polyhedron.faces);
  out += ",\"label\":" + std::to_string(record.label);
  out += ",\"id\":" + json(record.id).dump();
  out += '}';
  return out;
}

PolyhedronRecord decode_record(std::string_view text, std::optional<std::size_t> attr_dim) {
  const json doc = parse_document(text);
  if (!doc.is_object()) schema("$", "expected an object");

  PolyhedronRecord record;
  const json& vertices = field(doc, "vertices", "");
  if (!vertices.is_array()) schema("vertices", "expected an array");
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    const std::string where = "vertices[" + std::to_string(v) + "]";
    if (!vertices[v].is_array() || vertices[v].size() != 3) schema(where, "expected [x, y, z]");
    record.polyhedron.vertices.emplace_back(read_number(vertices[v][0], where + "[0]"),
                                            read_number(vertices[v][1], where + "[1]"),
                                            read_number(vertices[v][2], where + "[2]"));
  }
  record.polyhedron.faces = read_faces(doc, attr_dim);
  if (const auto it = doc.find("label"); it != doc.end()) record.label = read_int(*it, "label");
  if (const auto it = doc.find("id"); it != doc.end()) {
    if (!it->is_string()) schema("id", "expected a string");
    record.id = it->get<std::string>();
  }

  const auto report = validate_polyhedron(record.polyhedron);
  if (!report.ok) throw Error(ErrorCode::InvalidPolyhedron, report.summary());
  return record;
}

PolyhedronRecord load_record(const std::filesystem::path& path, std::optional<std::size_t> attr_dim) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return decode_record(buffer.str(), attr_dim);
}

void save_record(const std::filesystem::path& path, const PolyhedronRecord& record) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << encode_record(record) << '\n';
}

void write_corpus(std::ostream& os, std::span<const PolyhedronRecord> records) {
  for (const auto& r : records) os << encode_record(r) << '\n';
}

std::vector<PolyhedronRecord> read_corpus(std::istream& is, std::optional<std::size_t> attr_dim) {
  std::vector<PolyhedronRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(decode_record(line, attr_dim));
      if (!attr_dim) attr_dim = out.back().polyhedron.attr_dim();
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<PolyhedronRecord> load_corpus(const std::filesystem::path& path, std::optional<std::size_t> attr_dim) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_corpus(in, attr_dim);
}

void save_corpus(const std::filesystem::path& path, std::span<const PolyhedronRecord> records) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_corpus(out, records);
}

std::vector<ManifestEntry> read_manifest(std::istream& is) {
  std::vector<ManifestEntry> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "manifest line " + std::to_string(line_no);
    const json doc = parse_document(line);
    if (!doc.is_object()) schema(where, "expected an object");
    ManifestEntry entry;
    const json& path = field(doc, "path", where);
    if (!path.is_string()) schema(where + ".path", "expected a string");
    entry.path = path.get<std::string>();
    entry.label = read_int(field(doc, "label", where), where + ".label");
    if (const auto it = doc.find("id"); it != doc.end() && it->is_string()) entry.id = it->get<std::string>();
    out.push_back(std::move(entry));
  }
  return out;
}

std::vector<PolyhedronRecord> load_manifest(const std::filesystem::path& path, std::optional<std::size_t> attr_dim) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  const auto base = path.parent_path();
  std::vector<PolyhedronRecord> out;
  for (const auto& entry : read_manifest(in)) {
    auto record = load_record(base / entry.path, attr_dim);
    record.label = entry.label;
    record.id = entry.id.empty() ? entry.path : entry.id;
    if (!attr_dim) attr_dim = record.polyhedron.attr_dim();
    out.push_back(std::move(record));
  }
  return out;
}

std::vector<PolyhedronRecord> load_dataset(const std::filesystem::path& path, std::optional<std::size_t> attr_dim) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::string first;
  while (std::getline(in, first) && first.find_first_not_of(" \t\r") == std::string::npos) {
  }
  const bool manifest = first.find("\"path\"") != std::string::npos && first.find("\"vertices\"") == std::string::npos;
  in.close();
  return manifest ? load_manifest(path, attr_dim) : load_corpus(path, attr_dim);
}

std::string encode_topology(const Polyhedron& p) {
  std::string out = "{\"node_count\":" + std::to_string(p.vertices.size()) + ",";
  append_faces(out, p.faces);
  out += '}';
  return out;
}

SagTopology decode_topology(std::string_view text) {
  const json doc = parse_document(text);
  if (!doc.is_object()) schema("$", "expected an object");
  const int node_count = read_int(field(doc, "node_count", ""), "node_count");
  if (node_count < 0) schema("node_count", "must be non-negative");
  const auto faces = read_faces(doc, std::nullopt);
  for (std::size_t f = 0; f < faces.size(); ++f)
    for (int idx : faces[f].loop)
      if (idx < 0 || idx >= node_count)
        schema("faces[" + std::to_string(f) + "].loop", "node " + std::to_string(idx) + " out of range");
  return topology_from_loops(node_count, faces);
}

}  // namespace polynet::data
