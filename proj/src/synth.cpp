#include "cadec/synth.hpp"
#include "cadec/constraints.hpp"
#include "cadec/decode.hpp"
#include "cadec/errors.hpp"
#include <algorithm>
#include <cmath>

namespace cadec {

namespace {

int sample_dist(Rng& rng, const std::vector<std::pair<int, double>>& items) {
  const double r = rng.uniform();
  double acc = 0.0;
  for (const auto& [v, p] : items) {
    acc += p;
    if (r < acc) return v;
  }
  return items.back().first;
}

std::vector<int> grid_lengths(const GeneratorSpec& s) {
  std::vector<int> ts;
  int t = ((s.t_min + s.grid - 1) / s.grid) * s.grid;
  for (; t <= s.t_max; t += s.grid) ts.push_back(t);
  return ts;
}

}  // namespace

GeneratorSpec GeneratorSpec::defaults(int C) {
  GeneratorSpec s;
  s.num_classes = C;
  s.transition = Eigen::MatrixXd::Zero(C, C);
  for (int i = 0; i < C; ++i) {
    s.transition(i, (i + 1) % C) += 0.60;
    s.transition(i, (i + 2) % C) += 0.25;
    s.transition(i, (i - 1 + C) % C) += 0.15;
  }
  s.start_dist.assign(C, 0.0);
  s.start_dist[0] = 0.6;
  if (C > 1) s.start_dist[1] = 0.4; else s.start_dist[0] = 1.0;
  s.dur_min_units.resize(C);
  s.dur_max_units.resize(C);
  for (int c = 0; c < C; ++c) {
    s.dur_min_units[c] = 1 + (c % 3);
    s.dur_max_units[c] = std::min(s.grid, s.dur_min_units[c] + 3 + (c % 4));
  }
  return s;
}

void GeneratorSpec::check() const {
  const int C = num_classes;
  if (C < 1) throw InvalidSpec("num_classes must be positive");
  if (transition.rows() != C || transition.cols() != C)
    throw InvalidSpec("transition matrix shape mismatch");
  for (int i = 0; i < C; ++i) {
    double row = 0.0;
    for (int j = 0; j < C; ++j) {
      if (transition(i, j) < 0.0) throw InvalidSpec("negative transition weight");
      row += transition(i, j);
    }
    if (row > 0.0 && std::fabs(row - 1.0) > 1e-9)
      throw InvalidSpec("transition row " + std::to_string(i) +
                        " sums to " + std::to_string(row));
  }
  if (static_cast<int>(start_dist.size()) != C)
    throw InvalidSpec("start distribution size mismatch");
  double ssum = 0.0;
  for (double p : start_dist) {
    if (p < 0.0) throw InvalidSpec("negative start weight");
    ssum += p;
  }
  if (std::fabs(ssum - 1.0) > 1e-9) throw InvalidSpec("start distribution must sum to 1");
  if (static_cast<int>(dur_min_units.size()) != C ||
      static_cast<int>(dur_max_units.size()) != C)
    throw InvalidSpec("duration unit arrays size mismatch");
  for (int c = 0; c < C; ++c) {
    if (dur_min_units[c] < 1 || dur_max_units[c] < dur_min_units[c] ||
        dur_max_units[c] > grid)
      throw InvalidSpec("duration units out of range for class " + std::to_string(c));
  }
  if (grid < 1 || t_min < grid || t_max < t_min)
    throw InvalidSpec("bad grid or length range");
  if (sigma < 0.0) throw InvalidSpec("sigma must be non-negative");
  if (grid_lengths(*this).empty())
    throw InvalidSpec("no multiple of grid inside [t_min, t_max]");
}

LabelSeq generate_labels(const GeneratorSpec& spec, Rng& rng) {
  spec.check();
  const int C = spec.num_classes;
  const auto ts = grid_lengths(spec);
  const int T = ts[rng.below(static_cast<int>(ts.size()))];
  const int unit = T / spec.grid;

  std::vector<std::pair<int, double>> start_items;
  for (int c = 0; c < C; ++c)
    if (spec.start_dist[c] > 0.0) start_items.emplace_back(c, spec.start_dist[c]);

  for (int attempt = 0; attempt < 100; ++attempt) {
    int rem = spec.grid;
    int cur = sample_dist(rng, start_items);
    std::vector<std::pair<int, int>> segs;  // (class, units)
    bool ok = true;
    while (rem > 0) {
      int min_next = spec.grid + 1;
      for (int b = 0; b < C; ++b)
        if (spec.transition(cur, b) > 0.0)
          min_next = std::min(min_next, spec.dur_min_units[b]);
      std::vector<int> valid;
      const int hi = std::min(spec.dur_max_units[cur], rem);
      for (int L = spec.dur_min_units[cur]; L <= hi; ++L)
        if (rem - L == 0 || rem - L >= min_next) valid.push_back(L);
      if (valid.empty()) {
        ok = false;
        break;
      }
      const int L = valid[rng.below(static_cast<int>(valid.size()))];
      segs.emplace_back(cur, L);
      rem -= L;
      if (rem > 0) {
        std::vector<std::pair<int, double>> items;
        for (int b = 0; b < C; ++b)
          if (spec.transition(cur, b) > 0.0) items.emplace_back(b, spec.transition(cur, b));
        if (items.empty()) {
          ok = false;
          break;
        }
        cur = sample_dist(rng, items);
      }
    }
    if (!ok) continue;
    LabelSeq labels;
    labels.reserve(T);
    for (const auto& [c, L] : segs) labels.insert(labels.end(), L * unit, c);
    return labels;
  }
  throw InvalidSpec("duration ranges leave no way to fill the length budget");
}

ProbMatrix generate_probs(const GeneratorSpec& spec, const LabelSeq& gt, Rng& rng) {
  const int C = spec.num_classes;
  const int T = static_cast<int>(gt.size());
  const double sigma = spec.sigma;
  const double alpha = sigma / (sigma + 1.0);
  const double scale = 0.6 * sigma;
  ProbMatrix P(T, C);
  for (int t = 0; t < T; ++t) {
    double z = 0.0;
    for (int c = 0; c < C; ++c) {
      double v = (1.0 - alpha) * (c == gt[t] ? 1.0 : 0.0) +
                 alpha / static_cast<double>(C) + scale * rng.uniform();
      P(t, c) = v;
      z += v;
    }
    for (int c = 0; c < C; ++c) P(t, c) /= z;
  }
  return P;
}

std::pair<LabelSeq, ProbMatrix> generate_sequence(const GeneratorSpec& spec, Rng& rng) {
  LabelSeq gt = generate_labels(spec, rng);
  ProbMatrix P = generate_probs(spec, gt, rng);
  return {std::move(gt), std::move(P)};
}

std::pair<LabelSeq, ProbMatrix> generate_sequence(const GeneratorSpec& spec) {
  Rng rng(spec.seed);
  return generate_sequence(spec, rng);
}

SynthCorpus generate_corpus(const GeneratorSpec& spec, int n_train, int n_test,
                            Rng& rng) {
  if (n_train < 1 || n_test < 0) throw InvalidSpec("need at least one training sequence");
  SynthCorpus out;
  out.train.reserve(n_train);
  for (int i = 0; i < n_train; ++i) out.train.push_back(generate_labels(spec, rng));

  const ConstraintSet cs = extract_constraints(out.train, spec.num_classes, 0.0);
  out.test_gt.reserve(n_test);
  out.test_probs.reserve(n_test);
  for (int i = 0; i < n_test; ++i) {
    LabelSeq gt;
    for (int attempt = 0; attempt < 200; ++attempt) {
      gt = generate_labels(spec, rng);
      if (validate(gt, cs).empty()) break;
    }
    ProbMatrix P = generate_probs(spec, gt, rng);
    out.test_gt.push_back(std::move(gt));
    out.test_probs.push_back(std::move(P));
  }
  return out;
}

}
