#include "cadec/oracle.hpp"
#include "cadec/errors.hpp"
#include "cadec/scoring.hpp"
#include "chains.hpp"
#include <cmath>

namespace cadec {

DecodeResult oracle_decode(const ProbMatrix& P, const ConstraintSet& cs,
                           const DecodeConfig& cfg) {
  const int T = static_cast<int>(P.rows());
  const int C = static_cast<int>(P.cols());
  if (T < 1) throw DimensionMismatch("probability matrix has no rows");
  if (C != cs.num_classes)
    throw DimensionMismatch("matrix has " + std::to_string(C) +
                            " classes, constraints expect " +
                            std::to_string(cs.num_classes));
  if (std::pow(static_cast<double>(C), static_cast<double>(T)) > 1e7)
    throw InstanceTooLarge("C^T exceeds the enumeration guard");

  const LogEmissions E(P, cfg.epsilon_floor);
  const DurationCutoffs cut(cs, T);

  LabelSeq lab(T, 0);
  LabelSeq best_lab;
  double best = kNegInf;
  bool found = false;

  while (true) {
    double sc = kNegInf;
    bool scored = true;
    switch (cfg.mode) {
      case DecodeMode::hard:
        if (validate(lab, cs).empty())
          sc = detail::hard_chain(lab, cs, E, cfg.w_transition);
        else
          scored = false;
        break;
      case DecodeMode::soft:
        sc = detail::soft_chain(lab, cs, E, cut, cfg.w_transition, cfg.lambda,
                                cfg.w_duration);
        break;
      case DecodeMode::classical:
        sc = detail::classical_chain(lab, cs.transitions, E, cfg.w_transition);
        break;
    }
    if (scored &&
        (!found || sc > best || (sc == best && revlex_less(lab, best_lab)))) {
      found = true;
      best = sc;
      best_lab = lab;
    }
    int i = T - 1;
    while (i >= 0 && lab[i] == C - 1) lab[i--] = 0;
    if (i < 0) break;
    ++lab[i];
  }

  if (!found) {
    if (cfg.infeasible_fallback == InfeasibleFallback::classical) {
      DecodeConfig c2 = cfg;
      c2.mode = DecodeMode::classical;
      DecodeResult r = oracle_decode(P, cs, c2);
      r.used_fallback = true;
      r.feasible = false;
      return r;
    }
    throw InfeasibleConstraints("no label sequence satisfies the constraint set");
  }

  DecodeResult r;
  r.labels = best_lab;
  r.log_score = best;
  r.feasible = cfg.mode == DecodeMode::hard ? true : validate(best_lab, cs).empty();
  if (cfg.collect_trace) {
    if (cfg.mode == DecodeMode::hard)
      detail::hard_chain(best_lab, cs, E, cfg.w_transition, &r.trace);
    else if (cfg.mode == DecodeMode::soft)
      detail::soft_chain(best_lab, cs, E, cut, cfg.w_transition, cfg.lambda,
                         cfg.w_duration, &r.trace);
    else
      detail::classical_chain(best_lab, cs.transitions, E, cfg.w_transition,
                              &r.trace);
  }
  return r;
}

}
