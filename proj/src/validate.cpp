#include "cadec/decode.hpp"
#include "cadec/errors.hpp"
#include "cadec/scoring.hpp"
#include "chains.hpp"
#include <cmath>
#include <cstdio>

namespace cadec {

std::string Violation::describe() const {
  char buf[160];
  switch (kind) {
    case Kind::start:
      std::snprintf(buf, sizeof buf, "start class %d not in start set", to);
      break;
    case Kind::end:
      std::snprintf(buf, sizeof buf, "end class %d not in end set", to);
      break;
    case Kind::transition:
      std::snprintf(buf, sizeof buf, "transition %d->%d at frame %d not allowed",
                    from, to, frame);
      break;
    case Kind::duration:
      std::snprintf(buf, sizeof buf,
                    "segment %d (class %d) duration %.6f %s bound %.6f", segment,
                    to, observed, observed < bound ? "below" : "above", bound);
      break;
  }
  return buf;
}

std::vector<Violation> validate(const LabelSeq& labels, const ConstraintSet& cs) {
  std::vector<Violation> out;
  if (labels.empty()) return out;
  const int T = static_cast<int>(labels.size());
  const auto segs = segments_of(labels);

  if (!cs.start_set.count(segs.front().cls)) {
    Violation v{Violation::Kind::start};
    v.to = segs.front().cls;
    out.push_back(v);
  }
  if (!cs.end_set.count(segs.back().cls)) {
    Violation v{Violation::Kind::end};
    v.to = segs.back().cls;
    out.push_back(v);
  }

  for (size_t i = 0; i < segs.size(); ++i) {
    const int c = segs[i].cls;
    const int L = segs[i].length();
    const double frac = static_cast<double>(L) / static_cast<double>(T);
    const bool last = i + 1 == segs.size();
    if (last) {
      if (!final_allowed(L, T, cs.durations.d_max[c])) {
        Violation v{Violation::Kind::duration};
        v.segment = static_cast<int>(i);
        v.to = c;
        v.observed = frac;
        v.bound = cs.durations.d_max[c];
        out.push_back(v);
      }
    } else {
      if (!exit_allowed(L, T, cs.durations.d_min[c])) {
        Violation v{Violation::Kind::duration};
        v.segment = static_cast<int>(i);
        v.to = c;
        v.observed = frac;
        v.bound = cs.durations.d_min[c];
        out.push_back(v);
      }
      if (!alive_allowed(L, T, cs.durations.d_max[c])) {
        Violation v{Violation::Kind::duration};
        v.segment = static_cast<int>(i);
        v.to = c;
        v.observed = frac;
        v.bound = cs.durations.d_max[c];
        out.push_back(v);
      }
      if (!cs.transitions.has(c, segs[i + 1].cls)) {
        Violation v{Violation::Kind::transition};
        v.frame = segs[i + 1].start;
        v.from = c;
        v.to = segs[i + 1].cls;
        out.push_back(v);
      }
    }
  }
  return out;
}

double recompute_score(const ProbMatrix& P, const LabelSeq& labels,
                       const ConstraintSet& cs, const DecodeConfig& cfg) {
  if (labels.empty()) throw DimensionMismatch("empty label sequence");
  if (static_cast<size_t>(P.rows()) != labels.size())
    throw LengthMismatch("labels and matrix disagree on frame count");
  const LogEmissions E(P, cfg.epsilon_floor);
  switch (cfg.mode) {
    case DecodeMode::classical:
      return detail::classical_chain(labels, cs.transitions, E, cfg.w_transition);
    case DecodeMode::soft: {
      const DurationCutoffs cut(cs, E.T);
      return detail::soft_chain(labels, cs, E, cut, cfg.w_transition, cfg.lambda,
                                cfg.w_duration);
    }
    case DecodeMode::hard:
      break;
  }
  if (!validate(labels, cs).empty()) return kNegInf;
  return detail::hard_chain(labels, cs, E, cfg.w_transition);
}

double soft_hard_lambda_bound(const ProbMatrix& P, const ConstraintSet& cs,
                              double epsilon_floor) {
  const LogEmissions E(P, epsilon_floor);
  double total = 0.0;
  for (int t = 0; t < E.T; ++t)
    for (int c = 0; c < E.C; ++c) total += std::fabs(E.logp(t, c));
  const double cmin = cs.transitions.min_conf();
  return total + static_cast<double>(E.T) * std::fabs(std::log(cmin)) + 1.0;
}

}
