#pragma once
#include "constraints.hpp"
#include "types.hpp"
#include <cmath>
#include <limits>
#include <vector>

// Shared scoring primitives. Every scorer (windowed DP, enumeration oracle,
// independent recomputation) goes through these same inline expressions so
// equal paths produce bit-identical doubles. Keep the associations exactly as
// written; do not "simplify" the parenthesization.

namespace cadec {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double floored_log(double p, double eps) {
  return std::log(p > eps ? p : eps);
}

// Log-emissions plus per-class prefix sums. Within-segment emission mass is
// always a difference/offset of csum entries, never a fresh summation.
struct LogEmissions {
  ProbMatrix logp;  // T x C
  ProbMatrix csum;  // csum(t, c) = sum of logp(0..t, c)
  int T = 0;
  int C = 0;

  LogEmissions(const ProbMatrix& P, double eps_floor) {
    T = static_cast<int>(P.rows());
    C = static_cast<int>(P.cols());
    logp.resize(T, C);
    csum.resize(T, C);
    for (int t = 0; t < T; ++t)
      for (int c = 0; c < C; ++c)
        logp(t, c) = floored_log(P(t, c), eps_floor);
    for (int c = 0; c < C; ++c) {
      csum(0, c) = logp(0, c);
      for (int t = 1; t < T; ++t) csum(t, c) = csum(t - 1, c) + logp(t, c);
    }
  }
};

// Chain algebra over segment entry values. "a" is the score of a path at the
// first frame of its current segment (that frame's emission included).
inline double chain_key(double a, double csum_entry) { return a - csum_entry; }
inline double chain_exit(double key, double csum_prev) { return key + csum_prev; }
inline double chain_enter(double exit_val, double wtr_logconf, double logp_entry) {
  return (exit_val + wtr_logconf) + logp_entry;
}
inline double chain_finish(double key, double csum_last) { return key + csum_last; }

// Duration predicates, evaluated on integer segment lengths. These are the
// single authority on what a duration bound means; the DP, the oracle and
// validate() all call them (directly or via the cutoffs below).
inline bool exit_allowed(int L, int T, double d_min) {
  return static_cast<double>(L) / static_cast<double>(T) >= d_min;
}
inline bool alive_allowed(int L, int T, double d_max) {
  return L <= 1 || static_cast<double>(L - 1) / static_cast<double>(T) < d_max;
}
inline bool final_allowed(int L, int T, double d_max) {
  return static_cast<double>(L) / static_cast<double>(T) <= d_max;
}

// Integer cutoffs equivalent to the predicates (all three are monotone in L).
struct DurationCutoffs {
  std::vector<int> min_exit;   // smallest L that may end an interior segment; T+1 if none
  std::vector<int> max_alive;  // largest L a segment may grow to; always >= 1
  std::vector<int> max_final;  // largest L the last segment may have; 0 if none

  DurationCutoffs(const ConstraintSet& cs, int T);
};

// Reverse-lexicographic order: the tie-break shared by the decoders and the
// oracle. Backpointer reconstruction that prefers the lowest class at every
// boundary yields the sequence whose reversed labels compare smallest.
inline bool revlex_less(const LabelSeq& x, const LabelSeq& y) {
  for (size_t i = x.size(); i-- > 0;) {
    if (x[i] != y[i]) return x[i] < y[i];
  }
  return false;
}

}
