#include "cadec/io.hpp"
#include "cadec/errors.hpp"
#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <json.hpp>

namespace cadec {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr int kConstraintVersion = 1;
constexpr char kProbMagic[4] = {'C', 'D', 'P', 'B'};
constexpr std::uint32_t kProbVersion = 1;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where.empty() ? what : where + ": " + what);
}

const json& require(const json& obj, const char* field, const std::string& where) {
  auto it = obj.find(field);
  if (it == obj.end()) fail(where, std::string("missing field '") + field + "'");
  return *it;
}

int require_int(const json& v, const char* field, const std::string& where) {
  if (!v.is_number_integer()) fail(where, std::string("field '") + field + "' must be an integer");
  return v.get<int>();
}

double require_num(const json& v, const char* field, const std::string& where) {
  if (!v.is_number()) fail(where, std::string("field '") + field + "' must be a number");
  return v.get<double>();
}

std::set<int> read_class_set(const json& v, const char* field, int C,
                             const std::string& where) {
  if (!v.is_array()) fail(where, std::string("field '") + field + "' must be an array");
  std::set<int> out;
  for (const auto& e : v) {
    const int c = require_int(e, field, where);
    if (c < 0 || c >= C)
      fail(where, std::string("field '") + field + "' has class " + std::to_string(c) +
                      " outside [0, " + std::to_string(C) + ")");
    out.insert(c);
  }
  return out;
}

std::string trimmed(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isdigit(c); });
}

std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u32le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void check_prob_cell(double v, int row, const std::string& where) {
  if (std::isnan(v) || std::isinf(v))
    fail(where, "non-finite probability in row " + std::to_string(row));
  if (v < 0.0) fail(where, "negative probability in row " + std::to_string(row));
}

ProbMatrix parse_prob_binary(const std::string& bytes, const std::string& where) {
  if (bytes.size() < 16) fail(where, "truncated binary header");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t version = read_u32le(p + 4);
  if (version != kProbVersion)
    throw SchemaVersionMismatch(where + ": unsupported binary version " +
                                std::to_string(version));
  const std::uint32_t T = read_u32le(p + 8);
  const std::uint32_t C = read_u32le(p + 12);
  if (T == 0 || C == 0) fail(where, "binary header declares an empty matrix");
  const std::uint64_t need = 16ull + 4ull * T * C;
  if (bytes.size() != need)
    fail(where, "binary payload size mismatch (expected " + std::to_string(need) +
                    " bytes, got " + std::to_string(bytes.size()) + ")");
  ProbMatrix P(static_cast<int>(T), static_cast<int>(C));
  const unsigned char* q = p + 16;
  for (std::uint32_t t = 0; t < T; ++t) {
    bool any_pos = false;
    for (std::uint32_t c = 0; c < C; ++c, q += 4) {
      const float f = std::bit_cast<float>(read_u32le(q));
      const double v = static_cast<double>(f);
      check_prob_cell(v, static_cast<int>(t), where);
      if (v > 0.0) any_pos = true;
      P(static_cast<int>(t), static_cast<int>(c)) = v;
    }
    if (!any_pos) fail(where, "row " + std::to_string(t) + " has no positive entry");
  }
  return P;
}

ProbMatrix parse_prob_csv(const std::string& text, const std::string& where) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trimmed(line);
    if (t.empty()) continue;
    std::vector<double> row;
    std::stringstream cells(t);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      const std::string ct = trimmed(cell);
      try {
        size_t used = 0;
        const double v = std::stod(ct, &used);
        if (used != ct.size()) throw std::invalid_argument(ct);
        row.push_back(v);
      } catch (const std::exception&) {
        fail(where + ":" + std::to_string(lineno), "bad numeric cell '" + ct + "'");
      }
    }
    if (row.empty()) fail(where + ":" + std::to_string(lineno), "empty row");
    if (!rows.empty() && row.size() != rows.front().size())
      fail(where + ":" + std::to_string(lineno),
           "row width " + std::to_string(row.size()) + " differs from first row width " +
               std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(where, "no rows");
  const int T = static_cast<int>(rows.size());
  const int C = static_cast<int>(rows.front().size());
  ProbMatrix P(T, C);
  for (int t = 0; t < T; ++t) {
    bool any_pos = false;
    for (int c = 0; c < C; ++c) {
      const double v = rows[t][c];
      check_prob_cell(v, t, where);
      if (v > 0.0) any_pos = true;
      P(t, c) = v;
    }
    if (!any_pos) fail(where, "row " + std::to_string(t) + " has no positive entry");
  }
  return P;
}

}  // namespace

std::string constraints_to_json(const ConstraintSet& cs) {
  json doc;
  doc["version"] = kConstraintVersion;
  doc["num_classes"] = cs.num_classes;
  if (!cs.class_names.empty()) doc["class_names"] = cs.class_names;
  doc["start_set"] = cs.start_set;
  doc["end_set"] = cs.end_set;
  json trans = json::array();
  for (const auto& [a, b] : cs.transitions.entries()) {
    json e;
    e["from"] = a;
    e["to"] = b;
    e["conf"] = cs.transitions(a, b);
    trans.push_back(std::move(e));
  }
  doc["transitions"] = std::move(trans);
  json durs = json::array();
  for (int c = 0; c < cs.num_classes; ++c) {
    if (!cs.durations.observed[c]) continue;
    json e;
    e["class"] = c;
    e["d_min"] = cs.durations.d_min[c];
    e["d_max"] = cs.durations.d_max[c];
    durs.push_back(std::move(e));
  }
  doc["durations"] = std::move(durs);
  return doc.dump(2) + "\n";
}

ConstraintSet constraints_from_json(const std::string& text, const std::string& where) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(where, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(where, "top-level value must be an object");

  const int version = require_int(require(doc, "version", where), "version", where);
  if (version != kConstraintVersion)
    throw SchemaVersionMismatch(
        (where.empty() ? std::string() : where + ": ") + "unsupported schema version " +
        std::to_string(version) + " (expected " + std::to_string(kConstraintVersion) + ")");

  const int C = require_int(require(doc, "num_classes", where), "num_classes", where);
  if (C < 1) fail(where, "num_classes must be positive");

  ConstraintSet cs(C);
  cs.start_set = read_class_set(require(doc, "start_set", where), "start_set", C, where);
  cs.end_set = read_class_set(require(doc, "end_set", where), "end_set", C, where);

  const json& trans = require(doc, "transitions", where);
  if (!trans.is_array()) fail(where, "field 'transitions' must be an array");
  for (const auto& e : trans) {
    if (!e.is_object()) fail(where, "transition entries must be objects");
    const int a = require_int(require(e, "from", where), "from", where);
    const int b = require_int(require(e, "to", where), "to", where);
    const double p = require_num(require(e, "conf", where), "conf", where);
    if (a < 0 || a >= C || b < 0 || b >= C)
      fail(where, "transition (" + std::to_string(a) + " -> " + std::to_string(b) +
                      ") outside [0, " + std::to_string(C) + ")");
    if (a == b) fail(where, "self-transition " + std::to_string(a) + " not allowed");
    if (!(p > 0.0 && p <= 1.0))
      fail(where, "confidence " + std::to_string(p) + " for (" + std::to_string(a) +
                      " -> " + std::to_string(b) + ") outside (0, 1]");
    if (cs.transitions.has(a, b))
      fail(where, "duplicate transition (" + std::to_string(a) + " -> " +
                      std::to_string(b) + ")");
    cs.transitions.set(a, b, p);
  }

  const json& durs = require(doc, "durations", where);
  if (!durs.is_array()) fail(where, "field 'durations' must be an array");
  for (const auto& e : durs) {
    if (!e.is_object()) fail(where, "duration entries must be objects");
    const int c = require_int(require(e, "class", where), "class", where);
    const double lo = require_num(require(e, "d_min", where), "d_min", where);
    const double hi = require_num(require(e, "d_max", where), "d_max", where);
    if (c < 0 || c >= C)
      fail(where, "duration class " + std::to_string(c) + " outside [0, " +
                      std::to_string(C) + ")");
    if (cs.durations.observed[c])
      fail(where, "duplicate duration entry for class " + std::to_string(c));
    if (!(lo >= 0.0 && lo <= 1.0) || !(hi > 0.0 && hi <= 1.0) || lo > hi)
      fail(where, "duration bounds (" + std::to_string(lo) + ", " + std::to_string(hi) +
                      ") for class " + std::to_string(c) + " out of range");
    cs.durations.d_min[c] = lo;
    cs.durations.d_max[c] = hi;
    cs.durations.observed[c] = true;
  }

  if (auto it = doc.find("class_names"); it != doc.end()) {
    if (!it->is_array()) fail(where, "field 'class_names' must be an array");
    std::vector<std::string> names;
    for (const auto& e : *it) {
      if (!e.is_string()) fail(where, "class names must be strings");
      names.push_back(e.get<std::string>());
    }
    if (static_cast<int>(names.size()) != C)
      fail(where, "class_names lists " + std::to_string(names.size()) +
                      " names for " + std::to_string(C) + " classes");
    cs.class_names = std::move(names);
  }
  return cs;
}

void save_constraints(const ConstraintSet& cs, const std::string& path) {
  write_text_file(path, constraints_to_json(cs));
}

ConstraintSet load_constraints(const std::string& path) {
  return constraints_from_json(read_text_file(path), path);
}

NameMap read_mapping(const std::string& path) {
  NameMap map;
  std::istringstream in(read_text_file(path));
  std::string line;
  int lineno = 0;
  std::vector<std::pair<std::string, int>> pairs;
  std::set<std::string> seen;
  int max_index = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trimmed(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      fail(path + ":" + std::to_string(lineno), "expected 'name<TAB>index'");
    const std::string name = trimmed(line.substr(0, tab));
    const std::string idx = trimmed(line.substr(tab + 1));
    if (name.empty() || !all_digits(idx))
      fail(path + ":" + std::to_string(lineno), "expected 'name<TAB>index'");
    const int v = std::stoi(idx);
    if (!seen.insert(name).second)
      fail(path + ":" + std::to_string(lineno), "duplicate name '" + name + "'");
    pairs.emplace_back(name, v);
    max_index = std::max(max_index, v);
  }
  map.names.assign(max_index + 1, "");
  for (const auto& [name, v] : pairs) {
    if (!map.names[v].empty())
      fail(path, "index " + std::to_string(v) + " mapped twice");
    map.names[v] = name;
    map.index[name] = v;
  }
  return map;
}

LabelSeq read_label_file(const std::string& path, const NameMap& map, int num_classes) {
  std::istringstream in(read_text_file(path));
  LabelSeq out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string tok = trimmed(line);
    if (tok.empty()) continue;
    int v = -1;
    if (auto it = map.index.find(tok); it != map.index.end()) {
      v = it->second;
    } else if (all_digits(tok)) {
      try {
        v = std::stoi(tok);
      } catch (const std::exception&) {
        fail(path + ":" + std::to_string(lineno), "label index '" + tok + "' out of range");
      }
    } else {
      fail(path + ":" + std::to_string(lineno), "unknown label token '" + tok + "'");
    }
    if (v < 0 || (num_classes >= 0 && v >= num_classes))
      fail(path + ":" + std::to_string(lineno),
           "label " + std::to_string(v) + " outside [0, " + std::to_string(num_classes) + ")");
    out.push_back(v);
  }
  if (out.empty()) fail(path, "no labels");
  return out;
}

void write_label_file(const std::string& path, const LabelSeq& labels,
                      const NameMap& map) {
  std::string text;
  const int n = map.size();
  for (int v : labels) {
    if (v < n && !map.names[v].empty())
      text += map.names[v];
    else
      text += std::to_string(v);
    text += '\n';
  }
  write_text_file(path, text);
}

ProbMatrix read_prob_matrix(const std::string& path) {
  const std::string bytes = read_text_file(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kProbMagic, 4) == 0)
    return parse_prob_binary(bytes, path);
  return parse_prob_csv(bytes, path);
}

void write_prob_csv(const std::string& path, const ProbMatrix& P) {
  std::string text;
  char buf[64];
  for (int t = 0; t < P.rows(); ++t) {
    for (int c = 0; c < P.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", P(t, c));
      if (c) text += ',';
      text += buf;
    }
    text += '\n';
  }
  write_text_file(path, text);
}

void write_prob_binary(const std::string& path, const ProbMatrix& P) {
  std::string bytes;
  bytes.reserve(16 + 4 * static_cast<size_t>(P.size()));
  bytes.append(kProbMagic, 4);
  put_u32le(bytes, kProbVersion);
  put_u32le(bytes, static_cast<std::uint32_t>(P.rows()));
  put_u32le(bytes, static_cast<std::uint32_t>(P.cols()));
  for (int t = 0; t < P.rows(); ++t)
    for (int c = 0; c < P.cols(); ++c)
      put_u32le(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(P(t, c))));
  write_text_file(path, bytes);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write file: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("short write: " + path);
}

std::vector<std::string> list_files(const std::string& dir, const std::string& extension) {
  if (!fs::is_directory(dir)) throw ParseError("not a directory: " + dir);
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    if (!extension.empty() && e.path().extension() != extension) continue;
    out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}
