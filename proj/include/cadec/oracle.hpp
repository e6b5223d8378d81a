#pragma once
#include "decode.hpp"

namespace cadec {

// Exhaustive reference decoder: enumerates all C^T sequences, scores them with
// the same shared chain expressions as the DP, and breaks score ties by the
// shared reverse-lexicographic rule. Guards against C^T > 10^7.
DecodeResult oracle_decode(const ProbMatrix& P, const ConstraintSet& cs,
                           const DecodeConfig& cfg = {});

}
