#include "cadec/scoring.hpp"

namespace cadec {

namespace {

// smallest L in [1, T] satisfying a monotone nondecreasing predicate, T+1 if none
template <class Pred>
int first_true(int T, Pred ok) {
  int lo = 1, hi = T, ans = T + 1;
  while (lo <= hi) {
    int mid = lo + (hi - lo) / 2;
    if (ok(mid)) { ans = mid; hi = mid - 1; } else { lo = mid + 1; }
  }
  return ans;
}

// largest L in [1, T] satisfying a monotone nonincreasing predicate, 0 if none
template <class Pred>
int last_true(int T, Pred ok) {
  int lo = 1, hi = T, ans = 0;
  while (lo <= hi) {
    int mid = lo + (hi - lo) / 2;
    if (ok(mid)) { ans = mid; lo = mid + 1; } else { hi = mid - 1; }
  }
  return ans;
}

}  // namespace

DurationCutoffs::DurationCutoffs(const ConstraintSet& cs, int T) {
  const int C = cs.num_classes;
  min_exit.resize(C);
  max_alive.resize(C);
  max_final.resize(C);
  for (int c = 0; c < C; ++c) {
    const double dmin = cs.durations.d_min[c];
    const double dmax = cs.durations.d_max[c];
    min_exit[c] = first_true(T, [&](int L) { return exit_allowed(L, T, dmin); });
    max_alive[c] = last_true(T, [&](int L) { return alive_allowed(L, T, dmax); });
    if (max_alive[c] < 1) max_alive[c] = 1;  // length 1 is always reachable
    max_final[c] = last_true(T, [&](int L) { return final_allowed(L, T, dmax); });
  }
}

}
