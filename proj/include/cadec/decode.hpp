#pragma once
#include "constraints.hpp"
#include "types.hpp"
#include <string>
#include <vector>

namespace cadec {

enum class DecodeMode { hard, soft, classical };
enum class InfeasibleFallback { error, classical };

struct DecodeConfig {
  DecodeMode mode = DecodeMode::hard;
  double w_transition = 1.0;
  double w_duration = 1.0;   // scales duration penalties (soft mode)
  double lambda = 0.0;       // soft-mode violation penalty
  double epsilon_floor = 1e-10;
  InfeasibleFallback infeasible_fallback = InfeasibleFallback::error;
  bool collect_trace = false;
};

struct DecodeResult {
  LabelSeq labels;
  double log_score = 0.0;
  bool feasible = false;
  bool used_fallback = false;
  std::vector<double> trace;  // per-frame prefix score of the returned path
};

// Structurally constrained maximum-score segmentation. Dispatches on
// cfg.mode; hard mode either throws InfeasibleConstraints or falls back to
// classical decoding depending on cfg.infeasible_fallback.
DecodeResult decode_constrained(const ProbMatrix& P, const ConstraintSet& cs,
                                const DecodeConfig& cfg = {});

// Plain frame-level Viterbi: no start/end/duration constraints. Continuation
// contributes 0; a class switch contributes w_transition * log conf for pairs
// in the table and 0 for pairs it does not cover.
DecodeResult decode_classical(const ProbMatrix& P, const TransitionTable& table,
                              const DecodeConfig& cfg = {});

// Penalty-based relaxation: every violation a hard decode would forbid
// instead subtracts a weighted lambda. Always returns a result.
DecodeResult decode_soft(const ProbMatrix& P, const ConstraintSet& cs,
                         const DecodeConfig& cfg);

struct Violation {
  enum class Kind { start, end, transition, duration };
  Kind kind;
  int frame = -1;            // transition: first frame of the new segment
  int from = -1, to = -1;    // transition classes
  int segment = -1;          // duration: segment index
  double observed = 0.0;     // duration: fraction seen
  double bound = 0.0;        // duration: bound violated
  std::string describe() const;
};

// Checks a sequence against every constraint family with the decoder's exact
// semantics (interior segments: min-duration and growth bound; final segment:
// max-duration and end-set membership only).
std::vector<Violation> validate(const LabelSeq& labels, const ConstraintSet& cs);

// Objective value of a given sequence under cfg.mode, computed independently
// of any DP table. Hard mode returns -inf for infeasible sequences.
double recompute_score(const ProbMatrix& P, const LabelSeq& labels,
                       const ConstraintSet& cs, const DecodeConfig& cfg);

// Large-lambda bound: soft decoding with at least this lambda (default
// weights) cannot prefer any violation on a feasible instance.
double soft_hard_lambda_bound(const ProbMatrix& P, const ConstraintSet& cs,
                              double epsilon_floor = 1e-10);

}
