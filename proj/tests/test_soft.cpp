#include <doctest.h>
#include "cadec/constraints.hpp"
#include "cadec/decode.hpp"
#include "cadec/errors.hpp"
#include "cadec/oracle.hpp"
#include "cadec/synth.hpp"
#include "tools/fuzz.hpp"
#include <algorithm>
#include <cmath>
#include <limits>

using namespace cadec;

TEST_CASE("zero lambda reproduces classical viterbi") {
  Rng rng(70101);
  for (int i = 0; i < 200; ++i) {
    const auto inst = fuzz::random_instance(rng, 2, 12, 2, 4);
    DecodeConfig cfg = fuzz::random_config(rng);
    cfg.mode = DecodeMode::soft;
    cfg.lambda = 0.0;
    const DecodeResult soft = decode_soft(inst.P, inst.cs, cfg);
    const DecodeResult classical = decode_classical(inst.P, inst.cs.transitions, cfg);
    CHECK(soft.labels == classical.labels);
    CHECK(std::fabs(soft.log_score - classical.log_score) <=
          1e-9 * std::max(1.0, std::fabs(classical.log_score)));
  }
}

TEST_CASE("a large lambda recovers the hard optimum on feasible instances") {
  Rng rng(70202);
  int done = 0;
  while (done < 100) {
    const auto inst = fuzz::random_instance(rng, 2, 8, 2, 4);
    DecodeResult hard;
    try {
      hard = decode_constrained(inst.P, inst.cs);
    } catch (const InfeasibleConstraints&) {
      continue;
    }
    ++done;
    DecodeConfig cfg;
    cfg.mode = DecodeMode::soft;
    cfg.lambda = soft_hard_lambda_bound(inst.P, inst.cs);
    const DecodeResult soft = decode_soft(inst.P, inst.cs, cfg);
    CHECK(soft.labels == hard.labels);
    CHECK(soft.feasible);
    CHECK(validate(soft.labels, inst.cs).empty());
  }
}

TEST_CASE("soft decode agrees with the brute-force oracle") {
  Rng rng(70303);
  const double lambdas[] = {0.0, 0.25, 1.5, 10.0};
  for (int i = 0; i < 250; ++i) {
    const auto inst = fuzz::random_instance(rng, 2, 7, 2, 3);
    DecodeConfig cfg;
    cfg.mode = DecodeMode::soft;
    cfg.lambda = lambdas[rng.below(4)];
    cfg.w_transition = 0.25 + 1.75 * rng.uniform();
    cfg.w_duration = 0.25 + 1.75 * rng.uniform();
    const DecodeResult soft = decode_soft(inst.P, inst.cs, cfg);
    const DecodeResult orc = oracle_decode(inst.P, inst.cs, cfg);
    CHECK(soft.log_score == orc.log_score);
    CHECK(soft.labels == orc.labels);
    CHECK(soft.feasible == orc.feasible);

    const double re = recompute_score(inst.P, soft.labels, inst.cs, cfg);
    CHECK(re == soft.log_score);
  }
}

TEST_CASE("a mild lambda buys a cheap violation instead of a detour") {
  // the transition table forces a stop through class 2, which the emissions hate
  ProbMatrix P(6, 3);
  P << 0.90, 0.05, 0.05,
       0.90, 0.05, 0.05,
       0.90, 0.05, 0.05,
       0.05, 0.90, 0.05,
       0.05, 0.90, 0.05,
       0.05, 0.90, 0.05;
  ConstraintSet cs(3);
  cs.start_set = {0};
  cs.end_set = {1};
  cs.transitions.set(0, 2, 1.0);
  cs.transitions.set(2, 1, 1.0);

  const LabelSeq direct = {0, 0, 0, 1, 1, 1};

  DecodeConfig cfg;
  cfg.mode = DecodeMode::soft;
  cfg.lambda = 0.5;
  const DecodeResult soft = decode_soft(P, cs, cfg);
  CHECK(soft.labels == direct);
  CHECK_FALSE(soft.feasible);
  const auto viol = validate(soft.labels, cs);
  REQUIRE(viol.size() == 1);
  CHECK(viol[0].kind == Violation::Kind::transition);

  const DecodeResult hard = decode_constrained(P, cs);
  CHECK(hard.labels != direct);
  CHECK(std::count(hard.labels.begin(), hard.labels.end(), 2) > 0);
  CHECK(validate(hard.labels, cs).empty());
  const DecodeResult orc = oracle_decode(P, cs, {});
  CHECK(hard.labels == orc.labels);
  CHECK(hard.log_score == orc.log_score);
}

TEST_CASE("raising lambda never raises the soft optimum") {
  Rng rng(70404);
  for (int i = 0; i < 100; ++i) {
    const auto inst = fuzz::random_instance(rng, 2, 10, 2, 4);
    DecodeConfig cfg;
    cfg.mode = DecodeMode::soft;
    double prev = std::numeric_limits<double>::infinity();
    for (double lam : {0.0, 0.5, 2.0, 8.0}) {
      cfg.lambda = lam;
      const double s = decode_soft(inst.P, inst.cs, cfg).log_score;
      CHECK(s <= prev + 1e-9);
      prev = s;
    }
  }
}
