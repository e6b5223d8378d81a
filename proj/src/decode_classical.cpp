#include "cadec/decode.hpp"
#include "cadec/errors.hpp"
#include "cadec/scoring.hpp"
#include "chains.hpp"

// Frame-level Viterbi. Continuation adds only the emission; a switch adds the
// weighted log confidence when the table covers the pair and nothing when it
// does not. Ties prefer the lowest predecessor class and the lowest final
// class, which yields the reverse-lexicographically smallest optimum.

namespace cadec {

DecodeResult decode_classical(const ProbMatrix& P, const TransitionTable& table,
                              const DecodeConfig& cfg) {
  const int T = static_cast<int>(P.rows());
  const int C = static_cast<int>(P.cols());
  if (T < 1) throw DimensionMismatch("probability matrix has no rows");
  if (table.num_classes != 0 && table.num_classes != C)
    throw DimensionMismatch("matrix has " + std::to_string(C) +
                            " classes, transition table expects " +
                            std::to_string(table.num_classes));
  TransitionTable fallback;
  if (table.num_classes == 0) fallback = TransitionTable::uniform(C);
  const TransitionTable& tab = table.num_classes == 0 ? fallback : table;

  const LogEmissions E(P, cfg.epsilon_floor);
  ProbMatrix V(T, C);
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> B(T, C);
  for (int c = 0; c < C; ++c) V(0, c) = E.logp(0, c);
  B.setConstant(-1);

  for (int t = 1; t < T; ++t) {
    for (int c = 0; c < C; ++c) {
      double best = kNegInf;
      int best_p = -1;
      for (int cp = 0; cp < C; ++cp) {
        const double tr = detail::classical_step(tab, cp, c, cfg.w_transition);
        const double cand = (V(t - 1, cp) + tr) + E.logp(t, c);
        if (cand > best) {
          best = cand;
          best_p = cp;
        }
      }
      V(t, c) = best;
      B(t, c) = best_p;
    }
  }

  double best = kNegInf;
  int best_c = -1;
  for (int c = 0; c < C; ++c) {
    if (V(T - 1, c) > best) {
      best = V(T - 1, c);
      best_c = c;
    }
  }

  DecodeResult r;
  r.labels.assign(T, 0);
  r.labels[T - 1] = best_c;
  for (int t = T - 2; t >= 0; --t) r.labels[t] = B(t + 1, r.labels[t + 1]);
  r.log_score = best;
  r.feasible = true;
  if (cfg.collect_trace)
    detail::classical_chain(r.labels, tab, E, cfg.w_transition, &r.trace);
  return r;
}

}
