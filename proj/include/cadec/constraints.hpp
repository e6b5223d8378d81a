#pragma once
#include "types.hpp"
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace cadec {

// Pairwise transition confidences. Dense C x C storage: absent pairs hold 0,
// the diagonal is always 0 (self-transitions are not table entries).
struct TransitionTable {
  int num_classes = 0;
  Eigen::MatrixXd conf;

  TransitionTable() = default;
  explicit TransitionTable(int C)
      : num_classes(C), conf(Eigen::MatrixXd::Zero(C, C)) {}

  bool has(int a, int b) const { return conf(a, b) > 0.0; }
  double operator()(int a, int b) const { return conf(a, b); }
  void set(int a, int b, double p);
  int entry_count() const;
  // ordered (from, to) pairs, sorted
  std::vector<std::pair<int, int>> entries() const;
  double min_conf() const;  // smallest stored confidence, 1.0 if empty

  // every ordered pair at confidence 1/(C-1)
  static TransitionTable uniform(int C);

  bool operator==(const TransitionTable& o) const {
    return num_classes == o.num_classes && conf == o.conf;
  }
};

struct DurationBounds {
  std::vector<double> d_min;
  std::vector<double> d_max;
  std::vector<bool> observed;  // false -> sentinel (0, 1)

  DurationBounds() = default;
  explicit DurationBounds(int C)
      : d_min(C, 0.0), d_max(C, 1.0), observed(C, false) {}

  bool operator==(const DurationBounds& o) const {
    return d_min == o.d_min && d_max == o.d_max && observed == o.observed;
  }
};

struct ConstraintSet {
  int num_classes = 0;
  std::set<int> start_set;
  std::set<int> end_set;
  TransitionTable transitions;
  DurationBounds durations;
  std::vector<std::string> class_names;  // optional; empty means indices only

  ConstraintSet() = default;
  explicit ConstraintSet(int C)
      : num_classes(C), transitions(C), durations(C) {}

  bool operator==(const ConstraintSet& o) const {
    return num_classes == o.num_classes && start_set == o.start_set &&
           end_set == o.end_set && transitions == o.transitions &&
           durations == o.durations && class_names == o.class_names;
  }
};

// Segment-level statistics of a corpus: start/end classes, transition
// confidences Count(A->B)/Count(A) where Count(A) counts A-segments that have
// a successor, and per-class min/max segment length as a fraction of sequence
// length. slack widens bounds to (d_min*(1-s), min(1, d_max*(1+s))).
ConstraintSet extract_constraints(const std::vector<LabelSeq>& corpus,
                                  int num_classes, double slack = 0.0);

// every class a start and end, uniform transitions, bounds (0, 1)
ConstraintSet all_permissive(int num_classes);

}
