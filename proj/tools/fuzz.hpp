#pragma once
#include "cadec/constraints.hpp"
#include "cadec/decode.hpp"
#include "cadec/synth.hpp"
#include "cadec/types.hpp"
#include <algorithm>

// Random small instances shared by the test suite and the acceptance gate.
namespace fuzz {

inline cadec::ConstraintSet random_constraints(cadec::Rng& rng, int C) {
  cadec::ConstraintSet cs(C);
  for (int c = 0; c < C; ++c)
    if (rng.uniform() < 0.5) cs.start_set.insert(c);
  if (cs.start_set.empty()) cs.start_set.insert(rng.below(C));
  for (int c = 0; c < C; ++c)
    if (rng.uniform() < 0.5) cs.end_set.insert(c);
  if (cs.end_set.empty()) cs.end_set.insert(rng.below(C));
  for (int a = 0; a < C; ++a)
    for (int b = 0; b < C; ++b)
      if (a != b && rng.uniform() < 0.5)
        cs.transitions.set(a, b, 0.05 + 0.95 * rng.uniform());
  for (int c = 0; c < C; ++c) {
    if (rng.uniform() < 0.5) continue;  // keep the (0, 1) sentinel
    const double lo = 0.6 * rng.uniform();
    const double hi = std::min(1.0, lo + 0.05 + 0.95 * rng.uniform());
    cs.durations.d_min[c] = lo;
    cs.durations.d_max[c] = hi;
    cs.durations.observed[c] = true;
  }
  return cs;
}

struct Instance {
  cadec::ProbMatrix P;
  cadec::ConstraintSet cs;
};

inline cadec::ProbMatrix random_probs(cadec::Rng& rng, int T, int C) {
  cadec::ProbMatrix P(T, C);
  for (int t = 0; t < T; ++t) {
    bool any = false;
    for (int c = 0; c < C; ++c) {
      const double v = rng.uniform() < 0.05 ? 0.0 : rng.uniform() + 1e-4;
      P(t, c) = v;
      any = any || v > 0.0;
    }
    if (!any) P(t, rng.below(C)) = rng.uniform() + 1e-4;
  }
  return P;
}

inline Instance random_instance(cadec::Rng& rng, int t_min, int t_max, int c_min,
                                int c_max) {
  const int T = t_min + rng.below(t_max - t_min + 1);
  const int C = c_min + rng.below(c_max - c_min + 1);
  return {random_probs(rng, T, C), random_constraints(rng, C)};
}

inline cadec::DecodeConfig random_config(cadec::Rng& rng) {
  cadec::DecodeConfig cfg;
  if (rng.uniform() < 0.5) cfg.w_transition = 0.25 + 1.75 * rng.uniform();
  return cfg;
}

}  // namespace fuzz
