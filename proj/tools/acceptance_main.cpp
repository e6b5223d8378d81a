// Release gate: every check below must print PASS for the build to count.
#include "cadec/constraints.hpp"
#include "cadec/decode.hpp"
#include "cadec/errors.hpp"
#include "cadec/io.hpp"
#include "cadec/metrics.hpp"
#include "cadec/oracle.hpp"
#include "cadec/synth.hpp"
#include "cadec/types.hpp"
#include "tools/fuzz.hpp"
#include "tools/proc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

namespace {

namespace fs = std::filesystem;
using namespace cadec;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double secs() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail,
            double secs) {
  std::printf("[%s] %d %s: %s [%.1fs]\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str(), secs);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Decoded {
  bool feasible = false;
  DecodeResult res;
};

Decoded try_decode(const ProbMatrix& P, const ConstraintSet& cs,
                   const DecodeConfig& cfg) {
  Decoded d;
  try {
    d.res = decode_constrained(P, cs, cfg);
    d.feasible = true;
  } catch (const InfeasibleConstraints&) {
  }
  return d;
}

Decoded try_oracle(const ProbMatrix& P, const ConstraintSet& cs,
                   const DecodeConfig& cfg) {
  Decoded d;
  try {
    d.res = oracle_decode(P, cs, cfg);
    d.feasible = true;
  } catch (const InfeasibleConstraints&) {
  }
  return d;
}

// 1 + 2: exact agreement with brute force, and zero violations on every
// feasible decode.
void criterion_oracle_and_feasibility() {
  Timer t;
  Rng rng(20240817);
  const int kInstances = 1200;
  int feasible = 0, infeasible = 0, mismatches = 0, violations = 0;
  for (int i = 0; i < kInstances; ++i) {
    const auto inst = fuzz::random_instance(rng, 2, 8, 2, 4);
    const DecodeConfig cfg = fuzz::random_config(rng);
    const Decoded dp = try_decode(inst.P, inst.cs, cfg);
    const Decoded br = try_oracle(inst.P, inst.cs, cfg);
    if (dp.feasible != br.feasible) {
      ++mismatches;
      continue;
    }
    if (!dp.feasible) {
      ++infeasible;
      continue;
    }
    ++feasible;
    if (dp.res.log_score != br.res.log_score || dp.res.labels != br.res.labels)
      ++mismatches;
    if (!validate(dp.res.labels, inst.cs).empty()) ++violations;
  }
  const double secs = t.secs();
  report(1, "oracle equivalence", mismatches == 0 && secs < 60.0,
         fmt("%d/%d instances agree exactly (%d feasible, %d infeasible, %d mismatches)",
             kInstances - mismatches, kInstances, feasible, infeasible, mismatches),
         secs);
  report(2, "feasibility invariant", violations == 0,
         fmt("%d violations across %d feasible decodes", violations, feasible),
         secs);
}

// 3: all-permissive constraints with matched weights make the constrained and
// classical objectives identical.
void criterion_degeneracy() {
  Timer t;
  Rng rng(33001);
  int agree = 0;
  const int kInstances = 100;
  double worst = 0.0;
  for (int i = 0; i < kInstances; ++i) {
    const int T = 2 + rng.below(30);
    const int C = 2 + rng.below(4);
    const ProbMatrix P = fuzz::random_probs(rng, T, C);
    const ConstraintSet cs = all_permissive(C);
    DecodeConfig cfg = fuzz::random_config(rng);
    cfg.mode = DecodeMode::hard;
    const DecodeResult hard = decode_constrained(P, cs, cfg);
    cfg.mode = DecodeMode::classical;
    const DecodeResult cls = decode_classical(P, cs.transitions, cfg);
    const double rel = std::fabs(hard.log_score - cls.log_score) /
                       std::max({1.0, std::fabs(hard.log_score),
                                 std::fabs(cls.log_score)});
    worst = std::max(worst, rel);
    if (rel <= 1e-9) ++agree;
  }
  report(3, "all-permissive degeneracy", agree == kInstances,
         fmt("%d/%d scores agree to 1e-9 relative (worst %.3g)", agree, kInstances,
             worst),
         t.secs());
}

// 4: soft decoding at the computed lambda bound never chooses a violation on a
// feasible instance.
void criterion_soft_limit() {
  Timer t;
  Rng rng(44001);
  int checked = 0, violated = 0;
  while (checked < 100) {
    const auto inst = fuzz::random_instance(rng, 2, 8, 2, 4);
    DecodeConfig cfg;
    cfg.mode = DecodeMode::hard;
    if (!try_decode(inst.P, inst.cs, cfg).feasible) continue;
    ++checked;
    cfg.mode = DecodeMode::soft;
    cfg.lambda = soft_hard_lambda_bound(inst.P, inst.cs);
    const DecodeResult soft = decode_soft(inst.P, inst.cs, cfg);
    if (!validate(soft.labels, inst.cs).empty()) ++violated;
  }
  report(4, "soft large-lambda limit", violated == 0,
         fmt("%d/%d feasible instances decode violation-free at the bound",
             checked - violated, checked),
         t.secs());
}

// 5: golden metric values plus F1 monotonicity in tau.
void criterion_metrics() {
  Timer t;
  std::vector<std::string> problems;

  const double acc = frame_accuracy({0, 0, 1, 1}, {0, 1, 1, 1});
  if (acc != 75.0) problems.push_back(fmt("acc %.4f != 75", acc));

  const double edit = edit_score({0, 1, 0}, {0, 0, 1, 1});
  if (std::fabs(edit - 100.0 * 2.0 / 3.0) > 1e-9)
    problems.push_back(fmt("edit %.4f != 66.67", edit));

  const std::vector<Segment> pred1{{0, 0, 4}};
  const std::vector<Segment> gt1{{0, 0, 9}};
  for (double tau : {0.25, 0.50}) {
    const auto c = f1_counts(pred1, gt1, tau);
    if (c.f1() != 100.0)
      problems.push_back(fmt("f1_counts tau=%.2f gave %.2f != 100", tau, c.f1()));
  }
  if (f1_counts(pred1, gt1, 0.51).f1() != 0.0)
    problems.push_back("f1_counts tau=0.51 should be 0");

  const LabelSeq pred2(10, 0);
  LabelSeq gt2(5, 0);
  gt2.insert(gt2.end(), 5, 1);
  const double f1b = f1_at(pred2, gt2, 0.10);
  if (std::fabs(f1b - 100.0 * 2.0 / 3.0) > 1e-9)
    problems.push_back(fmt("split-gt f1 %.4f != 66.67", f1b));

  Rng rng(55001);
  int monotone = 0;
  const int kPairs = 500;
  for (int i = 0; i < kPairs; ++i) {
    const int T = 2 + rng.below(40);
    const int C = 2 + rng.below(5);
    LabelSeq a(T), b(T);
    for (int k = 0; k < T; ++k) {
      a[k] = rng.below(C);
      b[k] = rng.below(C);
    }
    bool ok = true;
    double prev = 1e18;
    for (double tau = 0.05; tau < 1.0; tau += 0.05) {
      const double f = f1_at(a, b, tau);
      if (f > prev + 1e-12) ok = false;
      prev = f;
    }
    if (ok) ++monotone;
  }
  if (monotone != kPairs)
    problems.push_back(fmt("monotonicity broke on %d pairs", kPairs - monotone));

  std::string detail = problems.empty()
                           ? fmt("goldens exact, monotone on %d/%d pairs", monotone,
                                 kPairs)
                           : problems.front();
  report(5, "metric goldens", problems.empty(), detail, t.secs());
}

// 6: every training sequence satisfies the constraints extracted from its own
// corpus at slack 0.
void criterion_self_consistency() {
  Timer t;
  Rng rng(66001);
  int sequences = 0, bad = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const int C = 2 + rng.below(5);
    const int n = 1 + rng.below(6);
    std::vector<LabelSeq> corpus;
    for (int i = 0; i < n; ++i) {
      const int T = 1 + rng.below(50);
      LabelSeq seq(T);
      for (int k = 0; k < T; ++k) seq[k] = rng.below(C);
      corpus.push_back(std::move(seq));
    }
    const ConstraintSet cs = extract_constraints(corpus, C, 0.0);
    for (const auto& seq : corpus) {
      ++sequences;
      if (!validate(seq, cs).empty()) ++bad;
    }
  }
  report(6, "extraction self-consistency", bad == 0,
         fmt("%d/%d corpus sequences feasible under their own constraints",
             sequences - bad, sequences),
         t.secs());
}

// 7: the synthetic experiment: constrained decoding beats classical Viterbi on
// edit score across seeds, one-sided sign test p < 0.05.
double sign_test_p(int wins, int n) {
  std::vector<double> binom(static_cast<size_t>(n) + 1, 0.0);
  binom[0] = 1.0;
  for (int i = 1; i <= n; ++i)
    for (int j = i; j >= 1; --j) binom[j] += binom[j - 1];
  double sum = 0.0;
  for (int k = wins; k <= n; ++k) sum += binom[k];
  return sum * std::pow(0.5, n);
}

void criterion_experiment() {
  Timer t;
  const int kSeeds = 20;
  int wins = 0, ties = 0;
  double margin_sum = 0.0, argmax_acc_sum = 0.0;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    GeneratorSpec spec = GeneratorSpec::defaults(10);
    spec.seed = static_cast<std::uint64_t>(seed);
    Rng rng(spec.seed);
    const SynthCorpus corpus = generate_corpus(spec, 50, 20, rng);
    const ConstraintSet cs = extract_constraints(corpus.train, 10, 0.0);

    double edit_hard = 0.0, edit_classical = 0.0;
    long correct = 0, frames = 0;
    DecodeConfig hard_cfg;
    hard_cfg.mode = DecodeMode::hard;
    hard_cfg.infeasible_fallback = InfeasibleFallback::classical;
    DecodeConfig cls_cfg;
    cls_cfg.mode = DecodeMode::classical;
    const int n_test = static_cast<int>(corpus.test_gt.size());
    for (int i = 0; i < n_test; ++i) {
      const ProbMatrix& P = corpus.test_probs[i];
      const LabelSeq& gt = corpus.test_gt[i];
      const int T = static_cast<int>(P.rows());
      for (int f = 0; f < T; ++f) {
        int arg = 0;
        P.row(f).maxCoeff(&arg);
        correct += arg == gt[f];
      }
      frames += T;
      edit_hard += edit_score(decode_constrained(P, cs, hard_cfg).labels, gt);
      edit_classical +=
          edit_score(decode_classical(P, cs.transitions, cls_cfg).labels, gt);
    }
    edit_hard /= n_test;
    edit_classical /= n_test;
    const double margin = edit_hard - edit_classical;
    margin_sum += margin;
    if (margin > 0.0)
      ++wins;
    else if (margin == 0.0)
      ++ties;
    argmax_acc_sum += 100.0 * static_cast<double>(correct) /
                      static_cast<double>(frames);
  }
  const int n_eff = kSeeds - ties;
  const double p = n_eff > 0 ? sign_test_p(wins, n_eff) : 1.0;
  const double mean_margin = margin_sum / kSeeds;
  const double mean_argmax = argmax_acc_sum / kSeeds;
  const double secs = t.secs();
  const bool pass = mean_margin > 0.0 && p < 0.05 && mean_argmax >= 60.0 &&
                    mean_argmax <= 70.0 && secs < 300.0;
  report(7, "synthetic improvement", pass,
         fmt("edit margin %+.2f mean over %d seeds, wins %d/%d, sign-test p=%.2g, "
             "argmax acc %.1f%%",
             mean_margin, kSeeds, wins, n_eff, p, mean_argmax),
         secs);
}

// 8: decode time grows essentially linearly in T (measured through the bench
// subcommand of the shipped binary).
void criterion_scaling(const std::string& bin, const fs::path& tmp) {
  Timer t;
  const fs::path csv = tmp / "bench.csv";
  const auto r = tool::run_command(
      {bin, "bench", "--t-list", "1000", "2000", "4000", "8000", "16000",
       "--num-classes", "48", "--edges", "150", "--reps", "3", "--min-time-ms",
       "25", "--seed", "3", "--csv", csv.string()});
  if (r.exit_code != 0) {
    report(8, "runtime scaling", false,
           fmt("bench exited %d: %s", r.exit_code, r.output.c_str()), t.secs());
    return;
  }
  std::vector<double> ts, ms;
  std::istringstream in(read_text_file(csv.string()));
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    double T = 0, hard = 0, cls = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &T, &hard, &cls) == 3) {
      ts.push_back(T);
      ms.push_back(hard);
    }
  }
  if (ts.size() != 5) {
    report(8, "runtime scaling", false, "bench CSV malformed", t.secs());
    return;
  }
  double mx = 0, my = 0;
  for (size_t i = 0; i < ts.size(); ++i) {
    mx += std::log(ts[i]);
    my += std::log(ms[i]);
  }
  mx /= static_cast<double>(ts.size());
  my /= static_cast<double>(ts.size());
  double num = 0, den = 0;
  for (size_t i = 0; i < ts.size(); ++i) {
    const double dx = std::log(ts[i]) - mx;
    num += dx * (std::log(ms[i]) - my);
    den += dx * dx;
  }
  const double slope = num / den;
  report(8, "runtime scaling", slope >= 0.9 && slope <= 1.2,
         fmt("log-log slope %.3f over T=1k..16k (C=48, 150 transitions)", slope),
         t.secs());
}

// 9: the full synth -> extract -> decode -> eval pipeline is byte-identical
// across repeated runs.
std::map<std::string, std::string> snapshot_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), root).string();
    if (rel.find("manifest") != std::string::npos) continue;
    out[rel] = read_text_file(e.path().string());
  }
  return out;
}

void criterion_determinism(const std::string& bin, const fs::path& tmp) {
  Timer t;
  auto pipeline = [&](const fs::path& dir) {
    auto run = [&](std::vector<std::string> a) {
      a.insert(a.begin(), bin);
      const auto r = tool::run_command(a);
      if (r.exit_code != 0)
        throw Error(fmt("pipeline step exited %d: %s", r.exit_code,
                        r.output.c_str()));
    };
    run({"synth", "--out", (dir / "data").string(), "--seed", "7", "--n-train",
         "20", "--n-test", "8"});
    run({"extract", "--labels", (dir / "data/train").string(), "--out",
         (dir / "constraints.json").string()});
    run({"decode", "--probs", (dir / "data/test").string(), "--constraints",
         (dir / "constraints.json").string(), "--out", (dir / "pred").string(),
         "--fallback", "classical"});
    run({"eval", "--pred", (dir / "pred").string(), "--gt",
         (dir / "data/test").string(), "--json", (dir / "report.json").string()});
  };
  try {
    const fs::path a = tmp / "run_a", b = tmp / "run_b";
    fs::create_directories(a);
    fs::create_directories(b);
    pipeline(a);
    pipeline(b);
    const auto sa = snapshot_tree(a), sb = snapshot_tree(b);
    int files = 0, diffs = 0;
    if (sa.size() != sb.size()) ++diffs;
    for (const auto& [rel, bytes] : sa) {
      ++files;
      auto it = sb.find(rel);
      if (it == sb.end() || it->second != bytes) ++diffs;
    }
    report(9, "end-to-end determinism", diffs == 0 && files > 0,
           fmt("%d files byte-identical across two pipeline runs (%d differ)",
               files, diffs),
           t.secs());
  } catch (const std::exception& e) {
    report(9, "end-to-end determinism", false, e.what(), t.secs());
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::string bin;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--bin") bin = argv[i + 1];
  if (bin.empty()) {
    if (const char* env = std::getenv("CADEC_BIN")) bin = env;
  }
  if (bin.empty()) bin = "./cadec";

  const fs::path tmp =
      fs::temp_directory_path() / fmt("cadec_acceptance_%d", getpid());
  fs::create_directories(tmp);

  criterion_oracle_and_feasibility();
  criterion_degeneracy();
  criterion_soft_limit();
  criterion_metrics();
  criterion_self_consistency();
  criterion_experiment();
  criterion_scaling(bin, tmp);
  criterion_determinism(bin, tmp);

  fs::remove_all(tmp);
  std::printf("acceptance: %d/9 criteria passed\n", 9 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
