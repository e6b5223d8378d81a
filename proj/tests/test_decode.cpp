#include <doctest.h>
#include "cadec/constraints.hpp"
#include "cadec/decode.hpp"
#include "cadec/errors.hpp"
#include "cadec/oracle.hpp"
#include "cadec/scoring.hpp"
#include "cadec/synth.hpp"
#include "tools/fuzz.hpp"
#include <cmath>
#include <limits>

using namespace cadec;

namespace {

ConstraintSet two_class_permissive() {
  ConstraintSet cs(2);
  cs.start_set = {0, 1};
  cs.end_set = {0, 1};
  cs.transitions.set(0, 1, 0.5);
  cs.transitions.set(1, 0, 0.5);
  return cs;
}

}  // namespace

TEST_CASE("argmax path wins when switching never pays") {
  ProbMatrix P(3, 2);
  P << 0.9, 0.1, 0.8, 0.2, 0.6, 0.4;
  const ConstraintSet cs = two_class_permissive();
  const DecodeResult res = decode_constrained(P, cs);
  CHECK(res.labels == LabelSeq{0, 0, 0});
  CHECK(res.feasible);
  CHECK_FALSE(res.used_fallback);
  const DecodeResult orc = oracle_decode(P, cs, {});
  CHECK(res.log_score == orc.log_score);
  CHECK(res.labels == orc.labels);
}

TEST_CASE("restricting the start set forces the first label") {
  ProbMatrix P(3, 2);
  P << 0.9, 0.1, 0.8, 0.2, 0.6, 0.4;
  ConstraintSet cs = two_class_permissive();
  cs.start_set = {1};
  const DecodeResult res = decode_constrained(P, cs);
  CHECK(res.labels[0] == 1);
  const DecodeResult orc = oracle_decode(P, cs, {});
  CHECK(res.log_score == orc.log_score);
  CHECK(res.labels == orc.labels);
}

TEST_CASE("single-frame decode picks the best allowed class") {
  ProbMatrix P(1, 2);
  P << 0.3, 0.7;
  const ConstraintSet cs = two_class_permissive();
  const DecodeResult res = decode_constrained(P, cs);
  CHECK(res.labels == LabelSeq{1});
  CHECK(res.log_score == std::log(0.7));
}

TEST_CASE("unreachable end set is infeasible, fallback decodes classically") {
  ProbMatrix P(3, 2);
  P << 0.9, 0.1, 0.8, 0.2, 0.6, 0.4;
  ConstraintSet cs(2);
  cs.start_set = {0};
  cs.end_set = {1};  // no transitions at all, so class 1 is unreachable
  CHECK_THROWS_AS(decode_constrained(P, cs), InfeasibleConstraints);

  DecodeConfig cfg;
  cfg.infeasible_fallback = InfeasibleFallback::classical;
  const DecodeResult res = decode_constrained(P, cs, cfg);
  CHECK(res.used_fallback);
  CHECK_FALSE(res.feasible);
  DecodeConfig ccfg;
  ccfg.mode = DecodeMode::classical;
  CHECK(res.labels == decode_classical(P, cs.transitions, ccfg).labels);
}

TEST_CASE("classical viterbi follows the per-frame argmax under uniform confidences") {
  ProbMatrix P(2, 2);
  P << 0.9, 0.1, 0.8, 0.2;
  const DecodeResult res = decode_classical(P, TransitionTable::uniform(2), {});
  CHECK(res.labels == LabelSeq{0, 0});
}

TEST_CASE("classical viterbi breaks exact ties toward the lowest class") {
  ProbMatrix P(2, 2);
  P << 0.5, 0.5, 0.5, 0.5;
  TransitionTable table(2);
  table.set(0, 1, 1.0);
  table.set(1, 0, 1.0);
  const DecodeResult res = decode_classical(P, table, {});
  CHECK(res.labels == LabelSeq{0, 0});
  // the oracle confirms all four paths tie
  ConstraintSet cs = all_permissive(2);
  cs.transitions = table;
  DecodeConfig cfg;
  cfg.mode = DecodeMode::classical;
  const DecodeResult orc = oracle_decode(P, cs, cfg);
  CHECK(orc.log_score == res.log_score);
  CHECK(orc.labels == res.labels);
}

TEST_CASE("dimension mismatch is rejected") {
  ProbMatrix P(2, 3);
  P << 0.5, 0.2, 0.3, 0.1, 0.8, 0.1;
  CHECK_THROWS_AS(decode_constrained(P, two_class_permissive()), DimensionMismatch);
}

TEST_CASE("oracle refuses instances beyond its enumeration guard") {
  ProbMatrix P = ProbMatrix::Constant(30, 4, 0.25);
  CHECK_THROWS_AS(oracle_decode(P, all_permissive(4), {}), InstanceTooLarge);
}

TEST_CASE("decode agrees with the brute-force oracle on small instances") {
  Rng rng(90101);
  int feasible = 0, infeasible = 0;
  for (int i = 0; i < 300; ++i) {
    const auto inst = fuzz::random_instance(rng, 2, 8, 2, 4);
    DecodeConfig cfg = fuzz::random_config(rng);
    cfg.collect_trace = true;

    bool dp_ok = true, br_ok = true;
    DecodeResult dp, br;
    try {
      dp = decode_constrained(inst.P, inst.cs, cfg);
    } catch (const InfeasibleConstraints&) {
      dp_ok = false;
    }
    try {
      br = oracle_decode(inst.P, inst.cs, cfg);
    } catch (const InfeasibleConstraints&) {
      br_ok = false;
    }
    REQUIRE(dp_ok == br_ok);
    if (!dp_ok) {
      ++infeasible;
      continue;
    }
    ++feasible;
    CHECK(dp.log_score == br.log_score);
    CHECK(dp.labels == br.labels);

    // feasibility invariant and independent score recomputation
    CHECK(validate(dp.labels, inst.cs).empty());
    const double re = recompute_score(inst.P, dp.labels, inst.cs, cfg);
    CHECK(std::fabs(re - dp.log_score) <=
          1e-9 * std::max(1.0, std::fabs(dp.log_score)));

    // the trace walks monotonically to the final score
    REQUIRE(dp.trace.size() == static_cast<size_t>(inst.P.rows()));
    CHECK(dp.trace.back() == dp.log_score);
  }
  CHECK(feasible > 0);
  CHECK(infeasible > 0);
}

TEST_CASE("relaxing constraints never lowers the optimum") {
  Rng rng(90202);
  for (int i = 0; i < 200; ++i) {
    const auto inst = fuzz::random_instance(rng, 2, 8, 2, 4);
    ConstraintSet relaxed = inst.cs;
    const int C = relaxed.num_classes;
    for (int c = 0; c < C; ++c) {
      if (rng.uniform() < 0.5) relaxed.start_set.insert(c);
      if (rng.uniform() < 0.5) relaxed.end_set.insert(c);
      relaxed.durations.d_min[c] *= rng.uniform();
      relaxed.durations.d_max[c] +=
          (1.0 - relaxed.durations.d_max[c]) * rng.uniform();
    }
    for (int a = 0; a < C; ++a)
      for (int b = 0; b < C; ++b)
        if (a != b && !relaxed.transitions.has(a, b) && rng.uniform() < 0.3)
          relaxed.transitions.set(a, b, 0.05 + 0.95 * rng.uniform());

    const double kNeg = -std::numeric_limits<double>::infinity();
    double before = kNeg, after = kNeg;
    try {
      before = decode_constrained(inst.P, inst.cs).log_score;
    } catch (const InfeasibleConstraints&) {
    }
    try {
      after = decode_constrained(inst.P, relaxed).log_score;
    } catch (const InfeasibleConstraints&) {
    }
    CHECK(after >= before);
  }
}

TEST_CASE("degenerate constraints reduce to classical viterbi") {
  Rng rng(90303);
  for (int i = 0; i < 100; ++i) {
    const int T = 2 + rng.below(30);
    const int C = 2 + rng.below(4);
    const ProbMatrix P = fuzz::random_probs(rng, T, C);
    const ConstraintSet cs = all_permissive(C);
    DecodeConfig cfg = fuzz::random_config(rng);
    const double hard = decode_constrained(P, cs, cfg).log_score;
    const double classical = decode_classical(P, cs.transitions, cfg).log_score;
    CHECK(std::fabs(hard - classical) <=
          1e-9 * std::max({1.0, std::fabs(hard), std::fabs(classical)}));
  }
}

TEST_CASE("validate reports each constraint family") {
  ConstraintSet cs(2);
  cs.start_set = {0};
  cs.end_set = {1};
  // (0 -> 1) deliberately missing from the transition table
  const auto transition_report = validate({0, 0, 1}, cs);
  REQUIRE(transition_report.size() == 1);
  CHECK(transition_report[0].kind == Violation::Kind::transition);
  CHECK(transition_report[0].frame == 2);
  CHECK(transition_report[0].from == 0);
  CHECK(transition_report[0].to == 1);
  CHECK_FALSE(transition_report[0].describe().empty());

  // first segment takes 80% of the frames against a 0.5 ceiling
  ConstraintSet dur(2);
  dur.start_set = {0};
  dur.end_set = {1};
  dur.transitions.set(0, 1, 1.0);
  dur.durations.d_min[0] = 0.0;
  dur.durations.d_max[0] = 0.5;
  dur.durations.observed[0] = true;
  const auto duration_report = validate({0, 0, 0, 0, 0, 0, 0, 0, 1, 1}, dur);
  REQUIRE(duration_report.size() == 1);
  CHECK(duration_report[0].kind == Violation::Kind::duration);
  CHECK(duration_report[0].observed == doctest::Approx(0.8));
  CHECK(duration_report[0].bound == doctest::Approx(0.5));

  // wrong start and wrong end
  dur.transitions.set(1, 0, 1.0);
  const auto se_report = validate({1, 0}, dur);
  REQUIRE(se_report.size() == 2);
  CHECK(se_report[0].kind == Violation::Kind::start);
  CHECK(se_report[1].kind == Violation::Kind::end);
}
