#include "cadec/decode.hpp"
#include "cadec/errors.hpp"
#include "cadec/scoring.hpp"
#include "chains.hpp"
#include "window.hpp"
#include <algorithm>

// Hard-constraint decoding as an exact semi-Markov DP over segment entry
// positions. A(tau, c) is the best score of any feasible prefix whose last
// segment is class c starting at frame tau (that frame's emission included).
// Subtracting the emission prefix sum turns A into a position-independent key,
// so the admissible-entry window per predecessor class (segment length between
// its exit minimum and growth maximum) reduces to a sliding-window maximum.
// Cost is O(T * (C + |transitions|)) regardless of window widths.

namespace cadec {

using detail::SlideMax;

namespace {

struct Edge {
  int src;
  double wtlc;  // w_transition * log conf
};

struct HardContext {
  const ConstraintSet& cs;
  const LogEmissions& E;
  const DurationCutoffs& cut;
  int T, C;
  std::vector<std::vector<Edge>> in_edges;  // per target class, src ascending
  ProbMatrix A;

  HardContext(const ConstraintSet& cs_, const LogEmissions& E_,
              const DurationCutoffs& cut_, double wt)
      : cs(cs_), E(E_), cut(cut_), T(E_.T), C(E_.C), in_edges(C) {
    for (int a = 0; a < C; ++a)
      for (int b = 0; b < C; ++b)
        if (cs.transitions.has(a, b))
          in_edges[b].push_back({a, wt * std::log(cs.transitions(a, b))});
    A.resize(T, C);
    A.setConstant(kNegInf);
    for (int c : cs.start_set) A(0, c) = E.logp(0, c);
  }

  double key_at(int s, int c) const {
    const double a = A(s, c);
    return a == kNegInf ? kNegInf : chain_key(a, E.csum(s, c));
  }

  void forward() {
    std::vector<SlideMax> dq(C);
    for (int tau = 1; tau < T; ++tau) {
      for (int c = 0; c < C; ++c) {
        const int s_new = tau - cut.min_exit[c];
        if (s_new >= 0) dq[c].push(s_new, key_at(s_new, c));
        dq[c].drop_before(tau - cut.max_alive[c]);
      }
      for (int c = 0; c < C; ++c) {
        double best = kNegInf;
        for (const Edge& e : in_edges[c]) {
          const double kmax = dq[e.src].max_key();
          if (kmax == kNegInf) continue;
          const double X = chain_exit(kmax, E.csum(tau - 1, e.src));
          const double cand = chain_enter(X, e.wtlc, E.logp(tau, c));
          if (cand > best) best = cand;
        }
        if (best > A(tau, c)) A(tau, c) = best;
      }
    }
  }

  // best feasible full-path score, -inf when none
  double terminate() const {
    double best = kNegInf;
    for (int c : cs.end_set) {
      const int lo = std::max(0, T - cut.max_final[c]);
      for (int s = lo; s < T; ++s) {
        const double k = key_at(s, c);
        if (k == kNegInf) continue;
        const double v = chain_finish(k, E.csum(T - 1, c));
        if (v > best) best = v;
      }
    }
    return best;
  }
};

// Backward per-segment reconstruction of the reverse-lexicographically
// smallest optimal path. For the current segment (class wc, entries valid in
// [lo, hi], right edge right_end), G(s) is the full-path value if the segment
// starts at s and req is the value to preserve. Extending the segment one
// frame left stays optimal iff some earlier window position still achieves
// req; entering at s requires an incoming edge reproducing the cell value.
struct Reconstructor {
  HardContext& ctx;
  LabelSeq labels;

  explicit Reconstructor(HardContext& c) : ctx(c), labels(c.T, -1) {}

  struct WalkResult {
    int sigma;
    int src = -1;       // -1: reached frame 0
    double src_wtlc = 0.0;
  };

  template <class G>
  WalkResult walk(int wc, int hi, int lo, G value_at, double req, int right_end) {
    std::vector<double> run(hi - lo + 1);
    double m = kNegInf;
    for (int s = lo; s <= hi; ++s) {
      const double g = value_at(s);
      if (g > m) m = g;
      run[s - lo] = m;
    }
    int beta = hi;
    while (true) {
      const bool entry_here = value_at(beta) == req;
      const bool extend_ok = beta > lo && run[beta - 1 - lo] == req;
      if (entry_here && beta == 0) {
        if (ctx.A(0, wc) != kNegInf) {
          std::fill(labels.begin(), labels.begin() + right_end + 1, wc);
          return {0, -1, 0.0};
        }
      }
      if (entry_here && beta > 0) {
        int best_src = -1;
        double best_wtlc = 0.0;
        for (const Edge& e : ctx.in_edges[wc]) {
          const int w_lo = std::max(0, beta - ctx.cut.max_alive[e.src]);
          const int w_hi = beta - ctx.cut.min_exit[e.src];
          if (w_hi < w_lo) continue;
          double km = kNegInf;
          for (int s2 = w_lo; s2 <= w_hi; ++s2) {
            const double k2 = ctx.key_at(s2, e.src);
            if (k2 > km) km = k2;
          }
          if (km == kNegInf) continue;
          const double X = chain_exit(km, ctx.E.csum(beta - 1, e.src));
          const double val = chain_enter(X, e.wtlc, ctx.E.logp(beta, wc));
          if (val == ctx.A(beta, wc)) {
            best_src = e.src;
            best_wtlc = e.wtlc;
            break;
          }
        }
        if (best_src >= 0 && (!extend_ok || best_src < wc)) {
          std::fill(labels.begin() + beta, labels.begin() + right_end + 1, wc);
          return {beta, best_src, best_wtlc};
        }
      }
      if (!extend_ok)
        throw Error("internal: path reconstruction lost the optimal value");
      --beta;
    }
  }

  LabelSeq run(double best) {
    const int T = ctx.T;
    int fin = -1;
    for (int c : ctx.cs.end_set) {
      const int lo = std::max(0, T - ctx.cut.max_final[c]);
      for (int s = lo; s < T; ++s) {
        const double k = ctx.key_at(s, c);
        if (k != kNegInf && chain_finish(k, ctx.E.csum(T - 1, c)) == best) {
          fin = c;
          break;
        }
      }
      if (fin >= 0) break;
    }
    const int c = fin;
    const int lo = std::max(0, T - ctx.cut.max_final[c]);
    auto final_value = [&](int s) {
      const double k = ctx.key_at(s, c);
      return k == kNegInf ? kNegInf : chain_finish(k, ctx.E.csum(T - 1, c));
    };
    WalkResult w = walk(c, T - 1, lo, final_value, best, T - 1);
    while (w.src >= 0) {
      const int boundary = w.sigma;
      const int c_right = labels[boundary];
      const double req = ctx.A(boundary, c_right);
      const int wc = w.src;
      const double wtlc = w.src_wtlc;
      const int w_hi = boundary - ctx.cut.min_exit[wc];
      const int w_lo = std::max(0, boundary - ctx.cut.max_alive[wc]);
      auto enter_value = [&](int s) {
        const double k = ctx.key_at(s, wc);
        if (k == kNegInf) return kNegInf;
        const double X = chain_exit(k, ctx.E.csum(boundary - 1, wc));
        return chain_enter(X, wtlc, ctx.E.logp(boundary, c_right));
      };
      w = walk(wc, w_hi, w_lo, enter_value, req, boundary - 1);
    }
    return labels;
  }
};

DecodeResult decode_hard(const ProbMatrix& P, const ConstraintSet& cs,
                         const DecodeConfig& cfg) {
  const int T = static_cast<int>(P.rows());
  const LogEmissions E(P, cfg.epsilon_floor);
  const DurationCutoffs cut(cs, T);
  HardContext ctx(cs, E, cut, cfg.w_transition);
  ctx.forward();
  const double best = ctx.terminate();
  if (best == kNegInf) {
    if (cfg.infeasible_fallback == InfeasibleFallback::classical) {
      DecodeResult r = decode_classical(P, cs.transitions, cfg);
      r.used_fallback = true;
      r.feasible = false;
      return r;
    }
    throw InfeasibleConstraints("no label sequence satisfies the constraint set");
  }
  Reconstructor rec(ctx);
  DecodeResult r;
  r.labels = rec.run(best);
  r.log_score = best;
  r.feasible = true;
  if (cfg.collect_trace) detail::hard_chain(r.labels, cs, E, cfg.w_transition, &r.trace);
  return r;
}

}  // namespace

DecodeResult decode_constrained(const ProbMatrix& P, const ConstraintSet& cs,
                                const DecodeConfig& cfg) {
  if (P.rows() < 1) throw DimensionMismatch("probability matrix has no rows");
  if (static_cast<int>(P.cols()) != cs.num_classes)
    throw DimensionMismatch("matrix has " + std::to_string(P.cols()) +
                            " classes, constraints expect " +
                            std::to_string(cs.num_classes));
  switch (cfg.mode) {
    case DecodeMode::classical:
      return decode_classical(P, cs.transitions, cfg);
    case DecodeMode::soft:
      return decode_soft(P, cs, cfg);
    case DecodeMode::hard:
      break;
  }
  return decode_hard(P, cs, cfg);
}

}
