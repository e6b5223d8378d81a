#pragma once
#include "constraints.hpp"
#include "types.hpp"
#include <map>
#include <string>
#include <vector>

namespace cadec {

// ---- constraint files: versioned JSON ----
std::string constraints_to_json(const ConstraintSet& cs);
ConstraintSet constraints_from_json(const std::string& text,
                                    const std::string& where = "");
void save_constraints(const ConstraintSet& cs, const std::string& path);
ConstraintSet load_constraints(const std::string& path);

// ---- class-name mapping: one "name<TAB>index" per line ----
struct NameMap {
  std::vector<std::string> names;       // index -> name ("" if unnamed)
  std::map<std::string, int> index;

  bool empty() const { return names.empty(); }
  int size() const { return static_cast<int>(names.size()); }
};
NameMap read_mapping(const std::string& path);

// ---- label files: one token (class name or integer index) per line ----
// num_classes < 0 skips the range check.
LabelSeq read_label_file(const std::string& path, const NameMap& map,
                         int num_classes = -1);
void write_label_file(const std::string& path, const LabelSeq& labels,
                      const NameMap& map = {});

// ---- probability matrices ----
// CSV: T rows of C comma-separated floats. Binary: 16-byte header
// magic "CDPB" | u32 version | u32 T | u32 C (little-endian), then T*C
// float32 values row-major. read_prob_matrix auto-detects by the magic.
ProbMatrix read_prob_matrix(const std::string& path);
void write_prob_csv(const std::string& path, const ProbMatrix& P);
void write_prob_binary(const std::string& path, const ProbMatrix& P);

// small helpers shared by the tools
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::vector<std::string> list_files(const std::string& dir,
                                    const std::string& extension = "");

}
