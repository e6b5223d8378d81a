#include "cadec/constraints.hpp"
#include "cadec/errors.hpp"
#include <algorithm>

namespace cadec {

std::vector<Segment> segments_of(const LabelSeq& labels) {
  std::vector<Segment> segs;
  if (labels.empty()) return segs;
  int s = 0;
  const int T = static_cast<int>(labels.size());
  for (int t = 1; t <= T; ++t) {
    if (t == T || labels[t] != labels[t - 1]) {
      segs.push_back({labels[s], s, t - 1});
      s = t;
    }
  }
  return segs;
}

LabelSeq labels_from_segments(const std::vector<Segment>& segs) {
  LabelSeq labels;
  for (const auto& g : segs)
    for (int t = g.start; t <= g.end; ++t) labels.push_back(g.cls);
  return labels;
}

void TransitionTable::set(int a, int b, double p) {
  conf(a, b) = p;
}

int TransitionTable::entry_count() const {
  int n = 0;
  for (int a = 0; a < num_classes; ++a)
    for (int b = 0; b < num_classes; ++b)
      if (conf(a, b) > 0.0) ++n;
  return n;
}

std::vector<std::pair<int, int>> TransitionTable::entries() const {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < num_classes; ++a)
    for (int b = 0; b < num_classes; ++b)
      if (conf(a, b) > 0.0) out.emplace_back(a, b);
  return out;
}

double TransitionTable::min_conf() const {
  double m = 1.0;
  for (int a = 0; a < num_classes; ++a)
    for (int b = 0; b < num_classes; ++b)
      if (conf(a, b) > 0.0) m = std::min(m, conf(a, b));
  return m;
}

TransitionTable TransitionTable::uniform(int C) {
  TransitionTable t(C);
  if (C < 2) return t;
  const double p = 1.0 / static_cast<double>(C - 1);
  for (int a = 0; a < C; ++a)
    for (int b = 0; b < C; ++b)
      if (a != b) t.conf(a, b) = p;
  return t;
}

ConstraintSet extract_constraints(const std::vector<LabelSeq>& corpus,
                                  int num_classes, double slack) {
  if (corpus.empty()) throw EmptyCorpus("constraint extraction needs at least one sequence");
  const int C = num_classes;
  for (const auto& seq : corpus) {
    if (seq.empty()) throw EmptyCorpus("corpus contains an empty sequence");
    for (int v : seq)
      if (v < 0 || v >= C)
        throw ClassIndexOutOfRange("label " + std::to_string(v) +
                                   " outside [0, " + std::to_string(C) + ")");
  }

  ConstraintSet cs(C);
  Eigen::MatrixXd pair_count = Eigen::MatrixXd::Zero(C, C);
  std::vector<long> with_successor(C, 0);

  for (const auto& seq : corpus) {
    const auto segs = segments_of(seq);
    const double T = static_cast<double>(seq.size());
    cs.start_set.insert(segs.front().cls);
    cs.end_set.insert(segs.back().cls);
    for (size_t i = 0; i < segs.size(); ++i) {
      const int c = segs[i].cls;
      const double frac = static_cast<double>(segs[i].length()) / T;
      if (!cs.durations.observed[c]) {
        cs.durations.observed[c] = true;
        cs.durations.d_min[c] = frac;
        cs.durations.d_max[c] = frac;
      } else {
        cs.durations.d_min[c] = std::min(cs.durations.d_min[c], frac);
        cs.durations.d_max[c] = std::max(cs.durations.d_max[c], frac);
      }
      if (i + 1 < segs.size()) {
        with_successor[c] += 1;
        pair_count(c, segs[i + 1].cls) += 1.0;
      }
    }
  }

  for (int a = 0; a < C; ++a) {
    if (with_successor[a] == 0) continue;
    for (int b = 0; b < C; ++b)
      if (pair_count(a, b) > 0.0)
        cs.transitions.conf(a, b) =
            pair_count(a, b) / static_cast<double>(with_successor[a]);
  }

  for (int c = 0; c < C; ++c) {
    if (!cs.durations.observed[c]) {
      cs.durations.d_min[c] = 0.0;
      cs.durations.d_max[c] = 1.0;
    } else if (slack > 0.0) {
      cs.durations.d_min[c] *= (1.0 - slack);
      cs.durations.d_max[c] = std::min(1.0, cs.durations.d_max[c] * (1.0 + slack));
    }
  }
  return cs;
}

ConstraintSet all_permissive(int num_classes) {
  ConstraintSet cs(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    cs.start_set.insert(c);
    cs.end_set.insert(c);
    cs.durations.observed[c] = true;
    cs.durations.d_min[c] = 0.0;
    cs.durations.d_max[c] = 1.0;
  }
  cs.transitions = TransitionTable::uniform(num_classes);
  return cs;
}

}
