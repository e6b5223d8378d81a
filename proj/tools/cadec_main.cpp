#include "cadec/constraints.hpp"
#include "cadec/decode.hpp"
#include "cadec/errors.hpp"
#include "cadec/io.hpp"
#include "cadec/metrics.hpp"
#include "cadec/synth.hpp"
#include "cadec/types.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;
using namespace cadec;

constexpr const char* kToolVersion = "1.0.0";

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
  }
};

// ---- config-file merge: flags beat config, config beats env/defaults ----

struct ConfigFile {
  nlohmann::json j;

  static ConfigFile load(const std::string& path) {
    ConfigFile c;
    if (path.empty()) return c;
    try {
      c.j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path + ": invalid JSON: " + std::string(e.what()));
    }
    if (!c.j.is_object()) throw ParseError(path + ": config must be a JSON object");
    return c;
  }
  bool has(const std::string& k) const { return j.is_object() && j.contains(k); }
};

template <class T>
void merge_opt(const CLI::App& sub, const char* flag, const ConfigFile& cfg,
               const char* key, T& var) {
  if (sub.count(flag) > 0 || !cfg.has(key)) return;
  try {
    var = cfg.j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(std::string("config field '") + key + "' has the wrong type");
  }
}

long long resolve_seed(const CLI::App& sub, const ConfigFile& cfg, long long flag_val) {
  if (sub.count("--seed") > 0) return flag_val;
  if (cfg.has("seed")) {
    if (!cfg.j.at("seed").is_number_integer())
      throw ParseError("config field 'seed' must be an integer");
    return cfg.j.at("seed").get<long long>();
  }
  if (const char* env = std::getenv("CADEC_SEED")) {
    try {
      size_t used = 0;
      const long long v = std::stoll(env, &used);
      if (used != std::strlen(env)) throw std::invalid_argument(env);
      return v;
    } catch (const std::exception&) {
      throw ParseError("CADEC_SEED must be an integer");
    }
  }
  return 1;
}

// ---- misc helpers ----

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&] {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

DecodeMode parse_mode(const std::string& s) {
  if (s == "hard") return DecodeMode::hard;
  if (s == "soft") return DecodeMode::soft;
  if (s == "classical") return DecodeMode::classical;
  throw ParseError("unknown mode '" + s + "' (expected hard, soft, or classical)");
}

InfeasibleFallback parse_fallback(const std::string& s) {
  if (s == "error") return InfeasibleFallback::error;
  if (s == "classical") return InfeasibleFallback::classical;
  throw ParseError("unknown fallback '" + s + "' (expected error or classical)");
}

NameMap namemap_from_names(const std::vector<std::string>& names) {
  NameMap m;
  m.names = names;
  for (int i = 0; i < static_cast<int>(names.size()); ++i)
    if (!names[i].empty()) m.index[names[i]] = i;
  return m;
}

std::string set_to_string(const std::set<int>& s) {
  std::string out = "{";
  bool first = true;
  for (int v : s) {
    if (!first) out += " ";
    out += std::to_string(v);
    first = false;
  }
  return out + "}";
}

ojson make_manifest(const std::string& command, const std::vector<std::string>& argv,
                    ojson config, ojson inputs, ojson seed, ojson outputs) {
  ojson m;
  m["manifest_version"] = 1;
  m["tool_version"] = kToolVersion;
  m["command"] = command;
  m["argv"] = argv;
  m["config"] = std::move(config);
  m["inputs"] = std::move(inputs);
  m["seed"] = std::move(seed);
  m["outputs"] = std::move(outputs);
  return m;
}

void write_manifest(const ojson& m, const std::string& path) {
  write_text_file(path, m.dump(2) + "\n");
}

std::string f1_key(double tau) {
  return fmt("f1_%d", static_cast<int>(std::llround(tau * 100.0)));
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const int n = static_cast<int>(xs.size());
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += std::log(xs[i]);
    my += std::log(ys[i]);
  }
  mx /= n;
  my /= n;
  double num = 0, den = 0;
  for (int i = 0; i < n; ++i) {
    const double dx = std::log(xs[i]) - mx;
    num += dx * (std::log(ys[i]) - my);
    den += dx * dx;
  }
  return num / den;
}

int run_cli(const std::vector<std::string>& args, int depth);

// ---- extract ----

int cmd_extract(const std::vector<std::string>& argv, const CLI::App& sub,
                std::string labels_dir, std::string mapping_path, std::string out_path,
                double slack, int num_classes, std::string config_path,
                std::string manifest_path) {
  const ConfigFile cfg = ConfigFile::load(config_path);
  merge_opt(sub, "--labels", cfg, "labels", labels_dir);
  merge_opt(sub, "--mapping", cfg, "mapping", mapping_path);
  merge_opt(sub, "--out", cfg, "out", out_path);
  merge_opt(sub, "--slack", cfg, "slack", slack);
  merge_opt(sub, "--num-classes", cfg, "num-classes", num_classes);
  merge_opt(sub, "--manifest", cfg, "manifest", manifest_path);
  if (labels_dir.empty()) throw ParseError("--labels is required");
  if (out_path.empty()) throw ParseError("--out is required");
  if (slack < 0.0) throw ParseError("--slack must be non-negative");
  if (manifest_path.empty()) manifest_path = out_path + ".manifest.json";

  Timer t_read;
  NameMap map;
  if (!mapping_path.empty()) map = read_mapping(mapping_path);
  const auto files = list_files(labels_dir, ".txt");
  if (files.empty()) throw EmptyCorpus("no .txt label files in " + labels_dir);

  int C = num_classes;
  if (C <= 0 && !map.empty()) C = map.size();
  std::vector<LabelSeq> corpus;
  corpus.reserve(files.size());
  for (const auto& f : files) corpus.push_back(read_label_file(f, map, C > 0 ? C : -1));
  if (C <= 0) {
    int hi = -1;
    for (const auto& seq : corpus)
      for (int v : seq) hi = std::max(hi, v);
    C = hi + 1;
  }
  const double read_ms = t_read.ms();

  Timer t_work;
  ConstraintSet cs = extract_constraints(corpus, C, slack);
  if (!map.empty()) {
    cs.class_names = map.names;
    cs.class_names.resize(C, "");
  }
  const double work_ms = t_work.ms();

  Timer t_write;
  save_constraints(cs, out_path);
  const double write_ms = t_write.ms();

  std::cout << fmt("sequences: %d  classes: %d\n", static_cast<int>(corpus.size()), C);
  std::cout << "start set: " << set_to_string(cs.start_set) << "\n";
  std::cout << "end set:   " << set_to_string(cs.end_set) << "\n";
  std::cout << fmt("transitions: %d\n", cs.transitions.entry_count());
  for (int c = 0; c < C; ++c) {
    std::string name = c < static_cast<int>(cs.class_names.size()) &&
                               !cs.class_names[c].empty()
                           ? " [" + cs.class_names[c] + "]"
                           : "";
    if (cs.durations.observed[c])
      std::cout << fmt("class %d%s: d_min=%.4f d_max=%.4f\n", c, name.c_str(),
                       cs.durations.d_min[c], cs.durations.d_max[c]);
    else
      std::cout << fmt("class %d%s: unobserved\n", c, name.c_str());
  }

  ojson config{{"labels", labels_dir}, {"mapping", mapping_path}, {"out", out_path},
               {"slack", slack},       {"num-classes", C}};
  ojson inputs = files;
  if (!mapping_path.empty()) inputs.push_back(mapping_path);
  ojson m = make_manifest("extract", argv, std::move(config), std::move(inputs),
                          nullptr, ojson::array({out_path}));
  m["timings_ms"] = {{"read", read_ms}, {"work", work_ms}, {"write", write_ms}};
  write_manifest(m, manifest_path);
  return 0;
}

// ---- decode ----

int cmd_decode(const std::vector<std::string>& argv, const CLI::App& sub,
               std::string probs_path, std::string constraints_path,
               std::string out_dir, std::string mode_s, double w_transition,
               double w_duration, double lambda, double epsilon,
               std::string fallback_s, std::string mapping_path, int jobs,
               std::string config_path, std::string manifest_path) {
  const ConfigFile cfg = ConfigFile::load(config_path);
  merge_opt(sub, "--probs", cfg, "probs", probs_path);
  merge_opt(sub, "--constraints", cfg, "constraints", constraints_path);
  merge_opt(sub, "--out", cfg, "out", out_dir);
  merge_opt(sub, "--mode", cfg, "mode", mode_s);
  merge_opt(sub, "--w-transition", cfg, "w-transition", w_transition);
  merge_opt(sub, "--w-duration", cfg, "w-duration", w_duration);
  merge_opt(sub, "--lambda", cfg, "lambda", lambda);
  merge_opt(sub, "--epsilon", cfg, "epsilon", epsilon);
  merge_opt(sub, "--fallback", cfg, "fallback", fallback_s);
  merge_opt(sub, "--mapping", cfg, "mapping", mapping_path);
  merge_opt(sub, "--jobs", cfg, "jobs", jobs);
  merge_opt(sub, "--manifest", cfg, "manifest", manifest_path);

  if (probs_path.empty()) throw ParseError("--probs is required");
  if (out_dir.empty()) throw ParseError("--out is required");
  DecodeConfig dc;
  dc.mode = parse_mode(mode_s);
  dc.w_transition = w_transition;
  dc.w_duration = w_duration;
  dc.lambda = lambda;
  dc.epsilon_floor = epsilon;
  dc.infeasible_fallback = parse_fallback(fallback_s);
  if (w_transition < 0 || w_duration < 0 || lambda < 0)
    throw ParseError("weights and lambda must be non-negative");
  if (epsilon <= 0) throw ParseError("--epsilon must be positive");
  if (jobs < 1) throw ParseError("--jobs must be at least 1");
  if (constraints_path.empty() && dc.mode != DecodeMode::classical)
    throw ParseError("--constraints is required for hard and soft modes");
  if (manifest_path.empty())
    manifest_path = (fs::path(out_dir) / "run_manifest.json").string();

  Timer t_read;
  std::vector<std::string> files;
  if (fs::is_directory(probs_path)) {
    files = list_files(probs_path, ".probs");
    const auto csvs = list_files(probs_path, ".csv");
    files.insert(files.end(), csvs.begin(), csvs.end());
    std::sort(files.begin(), files.end());
    if (files.empty())
      throw EmptyCorpus("no .probs or .csv matrices in " + probs_path);
  } else {
    files.push_back(probs_path);
  }

  ConstraintSet cs;
  if (!constraints_path.empty()) cs = load_constraints(constraints_path);
  NameMap out_map;
  if (!mapping_path.empty())
    out_map = read_mapping(mapping_path);
  else if (!cs.class_names.empty())
    out_map = namemap_from_names(cs.class_names);
  const double read_ms = t_read.ms();

  fs::create_directories(out_dir);
  const int n = static_cast<int>(files.size());
  std::vector<ojson> videos(n);

  Timer t_work;
  parallel_for(n, jobs, [&](int i) {
    const std::string stem = fs::path(files[i]).stem().string();
    const ProbMatrix P = read_prob_matrix(files[i]);
    DecodeResult res;
    if (dc.mode == DecodeMode::classical && constraints_path.empty())
      res = decode_classical(P, TransitionTable(), dc);
    else
      res = decode_constrained(P, cs, dc);
    write_label_file((fs::path(out_dir) / (stem + ".txt")).string(), res.labels,
                     out_map);
    ojson v;
    v["id"] = stem;
    v["feasible"] = res.feasible;
    v["used_fallback"] = res.used_fallback;
    v["log_score"] = res.log_score;
    videos[i] = std::move(v);
  });
  const double work_ms = t_work.ms();

  std::cout << fmt("decoded %d video%s -> %s\n", n, n == 1 ? "" : "s",
                   out_dir.c_str());

  ojson config{{"probs", probs_path},
               {"constraints", constraints_path},
               {"out", out_dir},
               {"mode", mode_s},
               {"w-transition", w_transition},
               {"w-duration", w_duration},
               {"lambda", lambda},
               {"epsilon", epsilon},
               {"fallback", fallback_s},
               {"mapping", mapping_path},
               {"jobs", jobs}};
  ojson inputs = files;
  if (!constraints_path.empty()) inputs.push_back(constraints_path);
  ojson outputs = ojson::array();
  for (const auto& f : files)
    outputs.push_back((fs::path(out_dir) / (fs::path(f).stem().string() + ".txt")).string());
  ojson m = make_manifest("decode", argv, std::move(config), std::move(inputs),
                          nullptr, std::move(outputs));
  m["videos"] = videos;
  m["timings_ms"] = {{"read", read_ms}, {"work", work_ms}};
  write_manifest(m, manifest_path);
  return 0;
}

// ---- eval ----

int cmd_eval(const std::vector<std::string>& argv, const CLI::App& sub,
             std::string pred_dir, std::string gt_dir, std::string mapping_path,
             std::vector<double> taus, std::vector<int> ignore, bool per_video,
             std::string json_path, int jobs, std::string config_path,
             std::string manifest_path) {
  const ConfigFile cfg = ConfigFile::load(config_path);
  merge_opt(sub, "--pred", cfg, "pred", pred_dir);
  merge_opt(sub, "--gt", cfg, "gt", gt_dir);
  merge_opt(sub, "--mapping", cfg, "mapping", mapping_path);
  merge_opt(sub, "--tau", cfg, "tau", taus);
  merge_opt(sub, "--ignore", cfg, "ignore", ignore);
  merge_opt(sub, "--per-video", cfg, "per-video", per_video);
  merge_opt(sub, "--json", cfg, "json", json_path);
  merge_opt(sub, "--jobs", cfg, "jobs", jobs);
  merge_opt(sub, "--manifest", cfg, "manifest", manifest_path);
  if (pred_dir.empty()) throw ParseError("--pred is required");
  if (gt_dir.empty()) throw ParseError("--gt is required");
  if (taus.empty()) throw ParseError("--tau needs at least one threshold");
  if (jobs < 1) throw ParseError("--jobs must be at least 1");
  if (manifest_path.empty())
    manifest_path = json_path.empty() ? "eval_manifest.json"
                                      : json_path + ".manifest.json";

  Timer t_read;
  NameMap map;
  if (!mapping_path.empty()) map = read_mapping(mapping_path);
  const auto gt_files = list_files(gt_dir, ".txt");
  if (gt_files.empty()) throw EmptyCorpus("no .txt label files in " + gt_dir);

  const int n = static_cast<int>(gt_files.size());
  std::vector<std::string> ids(n), pred_files(n);
  for (int i = 0; i < n; ++i) {
    const std::string base = fs::path(gt_files[i]).filename().string();
    ids[i] = fs::path(gt_files[i]).stem().string();
    pred_files[i] = (fs::path(pred_dir) / base).string();
    if (!fs::exists(pred_files[i]))
      throw MissingCounterpart("no prediction for " + base + " in " + pred_dir);
  }
  std::vector<std::pair<LabelSeq, LabelSeq>> pairs(n);
  parallel_for(n, jobs, [&](int i) {
    pairs[i] = {read_label_file(pred_files[i], map), read_label_file(gt_files[i], map)};
  });
  const double read_ms = t_read.ms();

  Timer t_work;
  EvalOptions opts;
  opts.taus = taus;
  opts.ignore_classes = ignore;
  opts.per_video = per_video;
  opts.ids = ids;
  const EvalReport rep = evaluate_corpus(pairs, opts);
  const double work_ms = t_work.ms();

  std::cout << fmt("videos: %d\n", n);
  std::cout << fmt("acc:    %.2f\n", rep.acc);
  std::cout << fmt("edit:   %.2f\n", rep.edit);
  for (double tau : taus) std::cout << fmt("f1@%.2f: %.2f\n", tau, rep.f1.at(tau));
  if (per_video) {
    for (const auto& pv : rep.per_video) {
      std::string line = fmt("  %s: acc=%.2f edit=%.2f", pv.id.c_str(), pv.acc, pv.edit);
      for (double tau : taus) line += fmt(" f1@%.2f=%.2f", tau, pv.f1.at(tau));
      std::cout << line << "\n";
    }
  }

  ojson report;
  report["report_version"] = 1;
  report["n_videos"] = n;
  report["acc"] = rep.acc;
  report["edit"] = rep.edit;
  for (double tau : taus) report[f1_key(tau)] = rep.f1.at(tau);
  if (per_video) {
    ojson rows = ojson::array();
    for (const auto& pv : rep.per_video) {
      ojson row;
      row["id"] = pv.id;
      row["acc"] = pv.acc;
      row["edit"] = pv.edit;
      for (double tau : taus) row[f1_key(tau)] = pv.f1.at(tau);
      rows.push_back(std::move(row));
    }
    report["per_video"] = std::move(rows);
  }
  Timer t_write;
  if (!json_path.empty()) write_text_file(json_path, report.dump(2) + "\n");
  const double write_ms = t_write.ms();

  ojson config{{"pred", pred_dir},   {"gt", gt_dir},     {"mapping", mapping_path},
               {"tau", taus},        {"ignore", ignore}, {"per-video", per_video},
               {"json", json_path},  {"jobs", jobs}};
  ojson inputs = ojson::array();
  for (const auto& f : gt_files) inputs.push_back(f);
  for (const auto& f : pred_files) inputs.push_back(f);
  if (!mapping_path.empty()) inputs.push_back(mapping_path);
  ojson outputs = ojson::array();
  if (!json_path.empty()) outputs.push_back(json_path);
  ojson m = make_manifest("eval", argv, std::move(config), std::move(inputs), nullptr,
                          std::move(outputs));
  m["report"] = report;
  m["timings_ms"] = {{"read", read_ms}, {"work", work_ms}, {"write", write_ms}};
  write_manifest(m, manifest_path);
  return 0;
}

// ---- synth ----

int cmd_synth(const std::vector<std::string>& argv, const CLI::App& sub,
              std::string out_dir, int num_classes, int n_train, int n_test,
              double sigma, int t_min, int t_max, int grid, long long seed_flag,
              std::string format, std::string config_path,
              std::string manifest_path) {
  const ConfigFile cfg = ConfigFile::load(config_path);
  merge_opt(sub, "--out", cfg, "out", out_dir);
  merge_opt(sub, "--num-classes", cfg, "num-classes", num_classes);
  merge_opt(sub, "--n-train", cfg, "n-train", n_train);
  merge_opt(sub, "--n-test", cfg, "n-test", n_test);
  merge_opt(sub, "--sigma", cfg, "sigma", sigma);
  merge_opt(sub, "--t-min", cfg, "t-min", t_min);
  merge_opt(sub, "--t-max", cfg, "t-max", t_max);
  merge_opt(sub, "--grid", cfg, "grid", grid);
  merge_opt(sub, "--format", cfg, "format", format);
  merge_opt(sub, "--manifest", cfg, "manifest", manifest_path);
  const long long seed = resolve_seed(sub, cfg, seed_flag);
  if (out_dir.empty()) throw ParseError("--out is required");
  if (format != "binary" && format != "csv")
    throw ParseError("unknown format '" + format + "' (expected binary or csv)");
  if (manifest_path.empty())
    manifest_path = (fs::path(out_dir) / "run_manifest.json").string();

  GeneratorSpec spec = GeneratorSpec::defaults(num_classes);
  spec.sigma = sigma;
  spec.t_min = t_min;
  spec.t_max = t_max;
  spec.grid = grid;
  spec.seed = static_cast<std::uint64_t>(seed);
  spec.check();

  Timer t_work;
  Rng rng(spec.seed);
  const SynthCorpus corpus = generate_corpus(spec, n_train, n_test, rng);
  const double work_ms = t_work.ms();

  Timer t_write;
  const fs::path train_dir = fs::path(out_dir) / "train";
  const fs::path test_dir = fs::path(out_dir) / "test";
  fs::create_directories(train_dir);
  fs::create_directories(test_dir);
  ojson split;
  split["version"] = 1;
  split["num_classes"] = num_classes;
  split["seed"] = seed;
  ojson train_list = ojson::array(), test_list = ojson::array();
  for (int i = 0; i < n_train; ++i) {
    const std::string rel = fmt("train/seq_%03d.txt", i);
    write_label_file((fs::path(out_dir) / rel).string(), corpus.train[i], {});
    train_list.push_back(rel);
  }
  const char* ext = format == "csv" ? ".csv" : ".probs";
  for (int i = 0; i < n_test; ++i) {
    const std::string rel_gt = fmt("test/seq_%03d.txt", i);
    const std::string rel_p = fmt("test/seq_%03d%s", i, ext);
    write_label_file((fs::path(out_dir) / rel_gt).string(), corpus.test_gt[i], {});
    if (format == "csv")
      write_prob_csv((fs::path(out_dir) / rel_p).string(), corpus.test_probs[i]);
    else
      write_prob_binary((fs::path(out_dir) / rel_p).string(), corpus.test_probs[i]);
    test_list.push_back(ojson{{"gt", rel_gt}, {"probs", rel_p}});
  }
  split["train"] = std::move(train_list);
  split["test"] = std::move(test_list);
  write_text_file((fs::path(out_dir) / "split.json").string(), split.dump(2) + "\n");
  const double write_ms = t_write.ms();

  std::cout << fmt("wrote %d train + %d test sequences -> %s\n", n_train, n_test,
                   out_dir.c_str());

  ojson config{{"out", out_dir}, {"num-classes", num_classes}, {"n-train", n_train},
               {"n-test", n_test}, {"sigma", sigma}, {"t-min", t_min},
               {"t-max", t_max}, {"grid", grid}, {"format", format}};
  ojson m = make_manifest("synth", argv, std::move(config), ojson::array(), seed,
                          ojson::array({out_dir}));
  m["timings_ms"] = {{"work", work_ms}, {"write", write_ms}};
  write_manifest(m, manifest_path);
  return 0;
}

// ---- bench ----

ConstraintSet bench_constraints(int C, int edges, Rng& rng) {
  if (C < 2) throw ParseError("--num-classes must be at least 2");
  if (edges > C * (C - 1))
    throw ParseError("--edges exceeds the number of ordered class pairs");
  ConstraintSet cs(C);
  for (int c = 0; c < C; ++c) {
    cs.start_set.insert(c);
    cs.end_set.insert(c);
    cs.durations.d_min[c] = 0.01;
    cs.durations.d_max[c] = 0.1;
    cs.durations.observed[c] = true;
  }
  for (int i = 0; i < C; ++i) cs.transitions.set(i, (i + 1) % C, 0.5);
  while (cs.transitions.entry_count() < edges) {
    const int a = rng.below(C);
    const int b = rng.below(C);
    if (a != b && !cs.transitions.has(a, b)) cs.transitions.set(a, b, 0.5);
  }
  return cs;
}

int cmd_bench(const std::vector<std::string>& argv, const CLI::App& sub,
              std::vector<int> t_list, int num_classes, int edges, int reps,
              long long seed_flag, std::string csv_path, double min_time_ms,
              std::string config_path, std::string manifest_path) {
  const ConfigFile cfg = ConfigFile::load(config_path);
  merge_opt(sub, "--t-list", cfg, "t-list", t_list);
  merge_opt(sub, "--num-classes", cfg, "num-classes", num_classes);
  merge_opt(sub, "--edges", cfg, "edges", edges);
  merge_opt(sub, "--reps", cfg, "reps", reps);
  merge_opt(sub, "--csv", cfg, "csv", csv_path);
  merge_opt(sub, "--min-time-ms", cfg, "min-time-ms", min_time_ms);
  merge_opt(sub, "--manifest", cfg, "manifest", manifest_path);
  const long long seed = resolve_seed(sub, cfg, seed_flag);
  if (t_list.empty()) throw ParseError("--t-list needs at least one length");
  for (size_t i = 1; i < t_list.size(); ++i)
    if (t_list[i] <= t_list[i - 1])
      throw ParseError("--t-list must be strictly increasing");
  if (t_list.front() < 100) throw ParseError("lengths below 100 are too noisy to time");
  if (reps < 1) throw ParseError("--reps must be at least 1");
  if (manifest_path.empty())
    manifest_path = csv_path.empty() ? "bench_manifest.json"
                                     : csv_path + ".manifest.json";

  Rng rng(static_cast<std::uint64_t>(seed));
  const ConstraintSet cs = bench_constraints(num_classes, edges, rng);
  DecodeConfig hard_cfg;
  hard_cfg.mode = DecodeMode::hard;
  DecodeConfig classical_cfg;
  classical_cfg.mode = DecodeMode::classical;

  struct Row {
    int T;
    double hard_ms, classical_ms;
  };
  std::vector<Row> rows;

  Timer t_work;
  for (int T : t_list) {
    ProbMatrix P(T, num_classes);
    for (int t = 0; t < T; ++t)
      for (int c = 0; c < num_classes; ++c) P(t, c) = rng.uniform() + 1e-3;

    auto time_decoder = [&](auto decode_once) {
      const auto first = decode_once();
      Timer cal;
      (void)decode_once();
      const double est = std::max(cal.ms(), 0.01);
      const int K = est >= min_time_ms
                        ? 1
                        : static_cast<int>(std::ceil(min_time_ms / est));
      std::vector<double> samples;
      samples.reserve(reps);
      for (int r = 0; r < reps; ++r) {
        Timer t0;
        for (int k = 0; k < K; ++k) {
          const auto res = decode_once();
          if (res.labels != first.labels)
            throw Error("decode output changed between repetitions");
        }
        samples.push_back(t0.ms() / K);
      }
      return median_of(samples);
    };

    Row row;
    row.T = T;
    row.hard_ms = time_decoder(
        [&] { return decode_constrained(P, cs, hard_cfg); });
    row.classical_ms = time_decoder(
        [&] { return decode_classical(P, cs.transitions, classical_cfg); });
    rows.push_back(row);
    std::cout << fmt("T=%-7d constrained %10.3f ms   classical %10.3f ms\n", T,
                     row.hard_ms, row.classical_ms);
  }
  const double work_ms = t_work.ms();

  double slope = 0.0;
  if (rows.size() >= 2) {
    std::vector<double> xs, ys;
    for (const auto& r : rows) {
      xs.push_back(static_cast<double>(r.T));
      ys.push_back(r.hard_ms);
    }
    slope = loglog_slope(xs, ys);
    std::cout << fmt("log-log slope (constrained): %.3f\n", slope);
  }

  if (!csv_path.empty()) {
    std::string csv = "T,constrained_ms,classical_ms\n";
    for (const auto& r : rows)
      csv += fmt("%d,%.6f,%.6f\n", r.T, r.hard_ms, r.classical_ms);
    write_text_file(csv_path, csv);
  }

  ojson config{{"t-list", t_list}, {"num-classes", num_classes}, {"edges", edges},
               {"reps", reps},     {"csv", csv_path},            {"min-time-ms", min_time_ms}};
  ojson results = ojson::array();
  for (const auto& r : rows)
    results.push_back(ojson{{"T", r.T},
                            {"constrained_ms", r.hard_ms},
                            {"classical_ms", r.classical_ms}});
  ojson outputs = ojson::array();
  if (!csv_path.empty()) outputs.push_back(csv_path);
  ojson m = make_manifest("bench", argv, std::move(config), ojson::array(), seed,
                          std::move(outputs));
  m["results"] = std::move(results);
  if (rows.size() >= 2) m["slope"] = slope;
  m["timings_ms"] = {{"work", work_ms}};
  write_manifest(m, manifest_path);
  return 0;
}

// ---- replay ----

int cmd_replay(const std::string& manifest_path, int depth) {
  if (depth > 0) throw ParseError("refusing to replay from inside a replay");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(manifest_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(manifest_path + ": invalid JSON: " + std::string(e.what()));
  }
  if (!doc.is_object() || !doc.contains("argv") || !doc["argv"].is_array())
    throw ParseError(manifest_path + ": missing field 'argv'");
  std::vector<std::string> argv;
  for (const auto& a : doc["argv"]) {
    if (!a.is_string()) throw ParseError(manifest_path + ": argv must hold strings");
    argv.push_back(a.get<std::string>());
  }
  if (argv.empty() || argv.front() == "replay")
    throw ParseError(manifest_path + ": nothing replayable in argv");
  return run_cli(argv, depth + 1);
}

// ---- driver ----

int run_cli(const std::vector<std::string>& args, int depth) {
  CLI::App app{"constraint-aware segmentation decoder"};
  app.set_version_flag("--version", std::string("cadec ") + kToolVersion);
  app.require_subcommand(1);

  // extract
  auto* s_ex = app.add_subcommand("extract", "build a constraint file from label files");
  std::string ex_labels, ex_mapping, ex_out, ex_config, ex_manifest;
  double ex_slack = 0.0;
  int ex_classes = -1;
  s_ex->add_option("--labels", ex_labels, "directory of .txt label files");
  s_ex->add_option("--mapping", ex_mapping, "name<TAB>index mapping file");
  s_ex->add_option("--out", ex_out, "output constraint JSON path");
  s_ex->add_option("--slack", ex_slack, "duration slack factor");
  s_ex->add_option("--num-classes", ex_classes, "class count (default: derive)");
  s_ex->add_option("--config", ex_config, "JSON config file mirroring the flags");
  s_ex->add_option("--manifest", ex_manifest, "run manifest path");

  // decode
  auto* s_de = app.add_subcommand("decode", "decode probability matrices to labels");
  std::string de_probs, de_constraints, de_out, de_mode = "hard",
              de_fallback = "error", de_mapping, de_config, de_manifest;
  double de_wt = 1.0, de_wd = 1.0, de_lambda = 0.0, de_eps = 1e-10;
  int de_jobs = 1;
  s_de->add_option("--probs", de_probs, "probability matrix file or directory");
  s_de->add_option("--constraints", de_constraints, "constraint JSON path");
  s_de->add_option("--out", de_out, "output directory for label files");
  s_de->add_option("--mode", de_mode, "hard | soft | classical");
  s_de->add_option("--w-transition", de_wt, "transition log-confidence weight");
  s_de->add_option("--w-duration", de_wd, "duration penalty weight (soft)");
  s_de->add_option("--lambda", de_lambda, "violation penalty (soft)");
  s_de->add_option("--epsilon", de_eps, "probability floor before log");
  s_de->add_option("--fallback", de_fallback, "on infeasible: error | classical");
  s_de->add_option("--mapping", de_mapping, "mapping for output label names");
  s_de->add_option("--jobs", de_jobs, "parallel workers");
  s_de->add_option("--config", de_config, "JSON config file mirroring the flags");
  s_de->add_option("--manifest", de_manifest, "run manifest path");

  // eval
  auto* s_ev = app.add_subcommand("eval", "score predictions against ground truth");
  std::string ev_pred, ev_gt, ev_mapping, ev_json, ev_config, ev_manifest;
  std::vector<double> ev_taus = {0.10, 0.25, 0.50};
  std::vector<int> ev_ignore;
  bool ev_per_video = false;
  int ev_jobs = 1;
  s_ev->add_option("--pred", ev_pred, "directory of predicted label files");
  s_ev->add_option("--gt", ev_gt, "directory of ground-truth label files");
  s_ev->add_option("--mapping", ev_mapping, "name<TAB>index mapping file");
  s_ev->add_option("--tau", ev_taus, "overlap thresholds")->expected(-1);
  s_ev->add_option("--ignore", ev_ignore, "class indices to ignore")->expected(-1);
  s_ev->add_flag("--per-video", ev_per_video, "include per-video rows");
  s_ev->add_option("--json", ev_json, "write the JSON report here");
  s_ev->add_option("--jobs", ev_jobs, "parallel workers");
  s_ev->add_option("--config", ev_config, "JSON config file mirroring the flags");
  s_ev->add_option("--manifest", ev_manifest, "run manifest path");

  // synth
  auto* s_sy = app.add_subcommand("synth", "generate a synthetic corpus");
  std::string sy_out, sy_format = "binary", sy_config, sy_manifest;
  int sy_classes = 10, sy_train = 50, sy_test = 20, sy_tmin = 200, sy_tmax = 500,
      sy_grid = 20;
  double sy_sigma = 1.3;
  long long sy_seed = 1;
  s_sy->add_option("--out", sy_out, "output directory");
  s_sy->add_option("--num-classes", sy_classes, "class count");
  s_sy->add_option("--n-train", sy_train, "training sequences");
  s_sy->add_option("--n-test", sy_test, "test sequences");
  s_sy->add_option("--sigma", sy_sigma, "emission noise level");
  s_sy->add_option("--t-min", sy_tmin, "minimum sequence length");
  s_sy->add_option("--t-max", sy_tmax, "maximum sequence length");
  s_sy->add_option("--grid", sy_grid, "duration grid units per sequence");
  s_sy->add_option("--seed", sy_seed, "random seed");
  s_sy->add_option("--format", sy_format, "probability file format: binary | csv");
  s_sy->add_option("--config", sy_config, "JSON config file mirroring the flags");
  s_sy->add_option("--manifest", sy_manifest, "run manifest path");

  // bench
  auto* s_be = app.add_subcommand("bench", "time decoding over a length sweep");
  std::string be_csv, be_config, be_manifest;
  std::vector<int> be_ts = {1000, 2000, 4000, 8000, 16000};
  int be_classes = 48, be_edges = 150, be_reps = 5;
  long long be_seed = 1;
  double be_min_time = 30.0;
  s_be->add_option("--t-list", be_ts, "sequence lengths, strictly increasing")
      ->expected(-1);
  s_be->add_option("--num-classes", be_classes, "class count");
  s_be->add_option("--edges", be_edges, "allowed transition count");
  s_be->add_option("--reps", be_reps, "repetitions per length");
  s_be->add_option("--seed", be_seed, "random seed");
  s_be->add_option("--csv", be_csv, "write timing rows here");
  s_be->add_option("--min-time-ms", be_min_time, "minimum timed batch duration");
  s_be->add_option("--config", be_config, "JSON config file mirroring the flags");
  s_be->add_option("--manifest", be_manifest, "run manifest path");

  // replay
  auto* s_re = app.add_subcommand("replay", "re-run the command a manifest records");
  std::string re_manifest;
  s_re->add_option("manifest", re_manifest, "run manifest path")->required();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (s_ex->parsed())
    return cmd_extract(args, *s_ex, ex_labels, ex_mapping, ex_out, ex_slack,
                       ex_classes, ex_config, ex_manifest);
  if (s_de->parsed())
    return cmd_decode(args, *s_de, de_probs, de_constraints, de_out, de_mode, de_wt,
                      de_wd, de_lambda, de_eps, de_fallback, de_mapping, de_jobs,
                      de_config, de_manifest);
  if (s_ev->parsed())
    return cmd_eval(args, *s_ev, ev_pred, ev_gt, ev_mapping, ev_taus, ev_ignore,
                    ev_per_video, ev_json, ev_jobs, ev_config, ev_manifest);
  if (s_sy->parsed())
    return cmd_synth(args, *s_sy, sy_out, sy_classes, sy_train, sy_test, sy_sigma,
                     sy_tmin, sy_tmax, sy_grid, sy_seed, sy_format, sy_config,
                     sy_manifest);
  if (s_be->parsed())
    return cmd_bench(args, *s_be, be_ts, be_classes, be_edges, be_reps, be_seed,
                     be_csv, be_min_time, be_config, be_manifest);
  if (s_re->parsed()) return cmd_replay(re_manifest, depth);
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run_cli(args, 0);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SchemaVersionMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ClassIndexOutOfRange& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidSpec& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const EmptyCorpus& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const DimensionMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const LengthMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const InfeasibleConstraints& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const MissingCounterpart& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 6;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
