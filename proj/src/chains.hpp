#pragma once
#include "cadec/decode.hpp"
#include "cadec/scoring.hpp"

// Per-sequence scorers used by the oracle, by recompute_score and by the
// reconstruction equality tests. Each walks the segment chain with the same
// pinned expressions the DPs use, so equal paths give bit-identical scores.

namespace cadec::detail {

// score of a feasible sequence under hard constraints
inline double hard_chain(const LabelSeq& labels, const ConstraintSet& cs,
                         const LogEmissions& E, double wt,
                         std::vector<double>* trace = nullptr) {
  const auto segs = segments_of(labels);
  const int T = E.T;
  if (trace) trace->assign(T, 0.0);
  double a = E.logp(0, segs[0].cls);
  for (size_t i = 1; i < segs.size(); ++i) {
    const auto& prev = segs[i - 1];
    const auto& cur = segs[i];
    const double key = chain_key(a, E.csum(prev.start, prev.cls));
    if (trace)
      for (int t = prev.start; t <= prev.end; ++t)
        (*trace)[t] = chain_exit(key, E.csum(t, prev.cls));
    const double X = chain_exit(key, E.csum(cur.start - 1, prev.cls));
    const double wtlc = wt * std::log(cs.transitions(prev.cls, cur.cls));
    a = chain_enter(X, wtlc, E.logp(cur.start, cur.cls));
  }
  const auto& last = segs.back();
  const double key = chain_key(a, E.csum(last.start, last.cls));
  if (trace)
    for (int t = last.start; t <= last.end; ++t)
      (*trace)[t] = chain_exit(key, E.csum(t, last.cls));
  return chain_finish(key, E.csum(T - 1, last.cls));
}

// soft-mode value of leaving a cp-segment spanning [sigma, tau-1]
inline double soft_exit_value(double key, int sigma, int tau, int cp,
                              const LogEmissions& E, double wdl,
                              const DurationCutoffs& cut) {
  const int L = tau - sigma;
  double X;
  if (L > cut.max_alive[cp]) {
    X = (key + wdl * static_cast<double>(sigma)) +
        (E.csum(tau - 1, cp) - wdl * static_cast<double>(tau - cut.max_alive[cp]));
  } else {
    X = key + E.csum(tau - 1, cp);
  }
  if (L < cut.min_exit[cp]) X = X - wdl;
  return X;
}

// soft-mode value of ending at T-1 with a c-segment starting at sigma
inline double soft_final_value(double key, int sigma, int c,
                               const ConstraintSet& cs, const LogEmissions& E,
                               double lam, double wdl,
                               const DurationCutoffs& cut) {
  const int T = E.T;
  const int L = T - sigma;
  double t0;
  if (L > cut.max_alive[c]) {
    t0 = (key + wdl * static_cast<double>(sigma)) +
         (E.csum(T - 1, c) - wdl * static_cast<double>(T - cut.max_alive[c]));
  } else {
    t0 = key + E.csum(T - 1, c);
  }
  const double t1 = t0 + (cs.end_set.count(c) ? 0.0 : -lam);
  return t1 + (L > cut.max_final[c] ? -wdl : 0.0);
}

inline double soft_boundary_term(const ConstraintSet& cs, int a, int b,
                                 double wt, double lam) {
  return cs.transitions.has(a, b) ? wt * std::log(cs.transitions(a, b))
                                  : -(wt * lam);
}

inline double soft_chain(const LabelSeq& labels, const ConstraintSet& cs,
                         const LogEmissions& E, const DurationCutoffs& cut,
                         double wt, double lam, double wd,
                         std::vector<double>* trace = nullptr) {
  const double wdl = wd * lam;
  const auto segs = segments_of(labels);
  const int T = E.T;
  if (trace) trace->assign(T, 0.0);
  const int c0 = segs[0].cls;
  double a = E.logp(0, c0) + (cs.start_set.count(c0) ? 0.0 : -lam);
  for (size_t i = 1; i < segs.size(); ++i) {
    const auto& prev = segs[i - 1];
    const auto& cur = segs[i];
    const double key = chain_key(a, E.csum(prev.start, prev.cls));
    if (trace)
      for (int t = prev.start; t <= prev.end; ++t)
        (*trace)[t] = chain_exit(key, E.csum(t, prev.cls));
    const double X = soft_exit_value(key, prev.start, cur.start, prev.cls, E, wdl, cut);
    const double tr = soft_boundary_term(cs, prev.cls, cur.cls, wt, lam);
    a = chain_enter(X, tr, E.logp(cur.start, cur.cls));
  }
  const auto& last = segs.back();
  const double key = chain_key(a, E.csum(last.start, last.cls));
  if (trace)
    for (int t = last.start; t <= last.end; ++t)
      (*trace)[t] = chain_exit(key, E.csum(t, last.cls));
  const double v = soft_final_value(key, last.start, last.cls, cs, E, lam, wdl, cut);
  if (trace) (*trace)[T - 1] = v;
  return v;
}

inline double classical_step(const TransitionTable& table, int a, int b, double wt) {
  if (a == b) return 0.0;
  return table.has(a, b) ? wt * std::log(table(a, b)) : 0.0;
}

inline double classical_chain(const LabelSeq& labels, const TransitionTable& table,
                              const LogEmissions& E, double wt,
                              std::vector<double>* trace = nullptr) {
  const int T = E.T;
  if (trace) trace->assign(T, 0.0);
  double a = E.logp(0, labels[0]);
  if (trace) (*trace)[0] = a;
  for (int t = 1; t < T; ++t) {
    const double tr = classical_step(table, labels[t - 1], labels[t], wt);
    a = (a + tr) + E.logp(t, labels[t]);
    if (trace) (*trace)[t] = a;
  }
  return a;
}

}  // namespace cadec::detail
