#include "cadec/decode.hpp"
#include "cadec/errors.hpp"
#include "cadec/scoring.hpp"
#include "chains.hpp"
#include "window.hpp"
#include <algorithm>

// Penalty-mode decoding over the same entry-indexed DP as hard mode. Every
// hard check maps to one additive penalty: start/end outside their sets cost
// lambda, an uncovered transition costs w_transition * lambda (and no
// confidence term), leaving a segment shorter than its exit minimum costs
// w_duration * lambda once, every frame a segment grows past its alive bound
// costs w_duration * lambda, and a final segment past its max-duration bound
// costs w_duration * lambda once. Segment length then splits into four
// regimes per predecessor class; each regime is a sliding-window (or
// fixed-left) maximum over position-independent keys, the overstay regimes
// using keys tilted by wdl * sigma so the per-frame penalty telescopes.

namespace cadec {

using detail::SlideMax;

namespace {

struct SoftContext {
  const ConstraintSet& cs;
  const LogEmissions& E;
  const DurationCutoffs& cut;
  double wt, lam, wdl;
  int T, C;
  ProbMatrix A;
  Eigen::MatrixXd boundary_term;  // (from, to) -> weighted log conf or penalty

  SoftContext(const ConstraintSet& cs_, const LogEmissions& E_,
              const DurationCutoffs& cut_, const DecodeConfig& cfg)
      : cs(cs_), E(E_), cut(cut_), wt(cfg.w_transition), lam(cfg.lambda),
        wdl(cfg.w_duration * cfg.lambda), T(E_.T), C(E_.C) {
    boundary_term.resize(C, C);
    for (int a = 0; a < C; ++a)
      for (int b = 0; b < C; ++b)
        boundary_term(a, b) =
            a == b ? 0.0 : detail::soft_boundary_term(cs, a, b, wt, lam);
    A.resize(T, C);
    for (int c = 0; c < C; ++c)
      A(0, c) = E.logp(0, c) + (cs.start_set.count(c) ? 0.0 : -lam);
  }

  double key_at(int s, int c) const {
    const double a = A(s, c);
    return a == kNegInf ? kNegInf : chain_key(a, E.csum(s, c));
  }

  void forward() {
    std::vector<SlideMax> clean(C), short_only(C), short_over(C);
    std::vector<double> over_max(C, kNegInf);
    std::vector<double> XS(C);
    for (int tau = 1; tau < T; ++tau) {
      for (int cp = 0; cp < C; ++cp) {
        const int lminE = cut.min_exit[cp];
        const int lmaxA = cut.max_alive[cp];
        int s = tau - lminE;
        if (s >= 0) clean[cp].push(s, key_at(s, cp));
        clean[cp].drop_before(tau - lmaxA);

        s = tau - 1;
        if (lminE > 1 && s >= 0) short_only[cp].push(s, key_at(s, cp));
        short_only[cp].drop_before(tau - std::min(lminE - 1, lmaxA));

        s = tau - (lmaxA + 1);
        if (lminE - 1 > lmaxA && s >= 0) {
          const double k = key_at(s, cp);
          short_over[cp].push(s, k == kNegInf ? kNegInf
                                              : k + wdl * static_cast<double>(s));
        }
        short_over[cp].drop_before(tau - (lminE - 1));

        s = tau - std::max(lminE, lmaxA + 1);
        if (s >= 0) {
          const double k = key_at(s, cp);
          const double key =
              k == kNegInf ? kNegInf : k + wdl * static_cast<double>(s);
          if (key > over_max[cp]) over_max[cp] = key;
        }

        double v = kNegInf;
        double m = clean[cp].max_key();
        if (m > kNegInf) v = std::max(v, m + E.csum(tau - 1, cp));
        m = short_only[cp].max_key();
        if (m > kNegInf) v = std::max(v, (m + E.csum(tau - 1, cp)) - wdl);
        m = short_over[cp].max_key();
        if (m > kNegInf)
          v = std::max(v, (m + (E.csum(tau - 1, cp) -
                                wdl * static_cast<double>(tau - lmaxA))) -
                              wdl);
        if (over_max[cp] > kNegInf)
          v = std::max(v, over_max[cp] +
                              (E.csum(tau - 1, cp) -
                               wdl * static_cast<double>(tau - lmaxA)));
        XS[cp] = v;
      }
      for (int c = 0; c < C; ++c) {
        double best = kNegInf;
        for (int cp = 0; cp < C; ++cp) {
          if (cp == c || XS[cp] == kNegInf) continue;
          const double cand =
              chain_enter(XS[cp], boundary_term(cp, c), E.logp(tau, c));
          if (cand > best) best = cand;
        }
        A(tau, c) = best;
      }
    }
  }

  double final_value(int s, int c) const {
    const double k = key_at(s, c);
    if (k == kNegInf) return kNegInf;
    return detail::soft_final_value(k, s, c, cs, E, lam, wdl, cut);
  }

  double enter_value(int s, int src, int boundary, int c_right) const {
    const double k = key_at(s, src);
    if (k == kNegInf) return kNegInf;
    const double X = detail::soft_exit_value(k, s, boundary, src, E, wdl, cut);
    return chain_enter(X, boundary_term(src, c_right), E.logp(boundary, c_right));
  }
};

struct SoftReconstructor {
  SoftContext& ctx;
  LabelSeq labels;

  explicit SoftReconstructor(SoftContext& c) : ctx(c), labels(c.T, -1) {}

  struct WalkResult {
    int sigma;
    int src = -1;
  };

  template <class G>
  WalkResult walk(int wc, int hi, G value_at, double req, int right_end) {
    std::vector<double> run(hi + 1);
    double m = kNegInf;
    for (int s = 0; s <= hi; ++s) {
      const double g = value_at(s);
      if (g > m) m = g;
      run[s] = m;
    }
    int beta = hi;
    while (true) {
      const bool entry_here = value_at(beta) == req;
      const bool extend_ok = beta > 0 && run[beta - 1] == req;
      if (entry_here && beta == 0) {
        std::fill(labels.begin(), labels.begin() + right_end + 1, wc);
        return {0, -1};
      }
      if (entry_here) {
        int best_src = -1;
        for (int src = 0; src < ctx.C && best_src < 0; ++src) {
          if (src == wc) continue;
          for (int s2 = 0; s2 < beta; ++s2) {
            if (ctx.enter_value(s2, src, beta, wc) == ctx.A(beta, wc)) {
              best_src = src;
              break;
            }
          }
        }
        if (best_src >= 0 && (!extend_ok || best_src < wc)) {
          std::fill(labels.begin() + beta, labels.begin() + right_end + 1, wc);
          return {beta, best_src};
        }
      }
      if (!extend_ok)
        throw Error("internal: soft path reconstruction lost the optimal value");
      --beta;
    }
  }

  LabelSeq run(double best) {
    const int T = ctx.T;
    int fin = -1;
    for (int c = 0; c < ctx.C && fin < 0; ++c)
      for (int s = 0; s < T; ++s)
        if (ctx.final_value(s, c) == best) {
          fin = c;
          break;
        }
    const int c = fin;
    WalkResult w =
        walk(c, T - 1, [&](int s) { return ctx.final_value(s, c); }, best, T - 1);
    while (w.src >= 0) {
      const int boundary = w.sigma;
      const int c_right = labels[boundary];
      const double req = ctx.A(boundary, c_right);
      const int wc = w.src;
      w = walk(wc, boundary - 1,
               [&](int s) { return ctx.enter_value(s, wc, boundary, c_right); },
               req, boundary - 1);
    }
    return labels;
  }
};

}  // namespace

DecodeResult decode_soft(const ProbMatrix& P, const ConstraintSet& cs,
                         const DecodeConfig& cfg) {
  const int T = static_cast<int>(P.rows());
  if (T < 1) throw DimensionMismatch("probability matrix has no rows");
  if (static_cast<int>(P.cols()) != cs.num_classes)
    throw DimensionMismatch("matrix has " + std::to_string(P.cols()) +
                            " classes, constraints expect " +
                            std::to_string(cs.num_classes));

  const LogEmissions E(P, cfg.epsilon_floor);
  const DurationCutoffs cut(cs, T);
  SoftContext ctx(cs, E, cut, cfg);
  ctx.forward();

  double best = kNegInf;
  for (int c = 0; c < ctx.C; ++c)
    for (int s = 0; s < T; ++s) best = std::max(best, ctx.final_value(s, c));

  SoftReconstructor rec(ctx);
  DecodeResult r;
  r.labels = rec.run(best);
  r.log_score = best;
  r.feasible = validate(r.labels, cs).empty();
  if (cfg.collect_trace)
    detail::soft_chain(r.labels, cs, E, cut, cfg.w_transition, cfg.lambda,
                       cfg.w_duration, &r.trace);
  return r;
}

}
