#include <doctest.h>
#include "cadec/constraints.hpp"
#include "cadec/io.hpp"
#include "tools/proc.hpp"
#include <nlohmann/json.hpp>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <unistd.h>

using namespace cadec;
namespace fs = std::filesystem;

namespace {

std::string binary() {
  const char* env = std::getenv("CADEC_BIN");
  return env ? env : "";
}

struct TmpDir {
  fs::path path;
  explicit TmpDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("cadec_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TmpDir() { fs::remove_all(path); }
  std::string sub(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) { return read_text_file(path); }

}  // namespace

TEST_CASE("the binary reports its version") {
  const std::string bin = binary();
  REQUIRE(!bin.empty());
  const auto r = tool::run_command({bin, "--version"});
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("cadec 1.0.0") != std::string::npos);
}

TEST_CASE("parse failures exit with code 2") {
  const std::string bin = binary();
  REQUIRE(!bin.empty());
  TmpDir tmp("parse");
  CHECK(tool::run_command({bin, "decode", "--no-such-flag"}).exit_code == 2);

  write_text_file(tmp.sub("broken.json"), "{ not json");
  write_text_file(tmp.sub("p.csv"), "0.6,0.4\n0.5,0.5\n");
  const auto r = tool::run_command({bin, "decode", "--probs", tmp.sub("p.csv"),
                                    "--constraints", tmp.sub("broken.json"),
                                    "--out", tmp.sub("out")});
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("error:") != std::string::npos);
}

TEST_CASE("an empty corpus exits with code 3") {
  const std::string bin = binary();
  REQUIRE(!bin.empty());
  TmpDir tmp("empty");
  fs::create_directories(tmp.sub("labels"));
  const auto r = tool::run_command({bin, "extract", "--labels", tmp.sub("labels"),
                                    "--out", tmp.sub("c.json")});
  CHECK(r.exit_code == 3);
}

TEST_CASE("a length mismatch in eval exits with code 4") {
  const std::string bin = binary();
  REQUIRE(!bin.empty());
  TmpDir tmp("mismatch");
  fs::create_directories(tmp.sub("gt"));
  fs::create_directories(tmp.sub("pred"));
  write_text_file(tmp.sub("gt") + "/a.txt", "0\n0\n1\n");
  write_text_file(tmp.sub("pred") + "/a.txt", "0\n0\n");
  const auto r = tool::run_command({bin, "eval", "--pred", tmp.sub("pred"),
                                    "--gt", tmp.sub("gt")});
  CHECK(r.exit_code == 4);
}

TEST_CASE("infeasible constraints exit with code 5 unless a fallback is chosen") {
  const std::string bin = binary();
  REQUIRE(!bin.empty());
  TmpDir tmp("infeasible");
  ConstraintSet cs(2);
  cs.start_set = {0};
  cs.end_set = {1};  // empty transition table: class 1 is unreachable
  save_constraints(cs, tmp.sub("c.json"));
  write_text_file(tmp.sub("p.csv"), "0.9,0.1\n0.8,0.2\n0.6,0.4\n");

  const auto hard = tool::run_command({bin, "decode", "--probs", tmp.sub("p.csv"),
                                       "--constraints", tmp.sub("c.json"),
                                       "--out", tmp.sub("out")});
  CHECK(hard.exit_code == 5);

  const auto soft = tool::run_command({bin, "decode", "--probs", tmp.sub("p.csv"),
                                       "--constraints", tmp.sub("c.json"),
                                       "--fallback", "classical",
                                       "--out", tmp.sub("out2")});
  CHECK(soft.exit_code == 0);
  CHECK(fs::exists(tmp.sub("out2") + "/p.txt"));
}

TEST_CASE("a prediction without a ground-truth twin exits with code 6") {
  const std::string bin = binary();
  REQUIRE(!bin.empty());
  TmpDir tmp("missing");
  fs::create_directories(tmp.sub("gt"));
  fs::create_directories(tmp.sub("pred"));
  write_text_file(tmp.sub("gt") + "/a.txt", "0\n1\n");
  write_text_file(tmp.sub("gt") + "/b.txt", "0\n1\n");
  write_text_file(tmp.sub("pred") + "/a.txt", "0\n1\n");
  const auto r = tool::run_command({bin, "eval", "--pred", tmp.sub("pred"),
                                    "--gt", tmp.sub("gt")});
  CHECK(r.exit_code == 6);
}

TEST_CASE("evaluating ground truth against itself scores 100 everywhere") {
  const std::string bin = binary();
  REQUIRE(!bin.empty());
  TmpDir tmp("self");
  REQUIRE(tool::run_command({bin, "synth", "--out", tmp.sub("data"),
                             "--num-classes", "6", "--n-train", "4",
                             "--n-test", "3", "--seed", "21"})
              .exit_code == 0);
  const std::string test_dir = tmp.sub("data") + "/test";
  const auto r = tool::run_command({bin, "eval", "--pred", test_dir, "--gt",
                                    test_dir, "--json", tmp.sub("rep.json")});
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("100.0") != std::string::npos);
  const auto rep = nlohmann::json::parse(slurp(tmp.sub("rep.json")));
  CHECK(rep.at("n_videos") == 3);
  CHECK(rep.at("acc") == 100.0);
  CHECK(rep.at("edit") == 100.0);
  CHECK(rep.at("f1_10") == 100.0);
  CHECK(rep.at("f1_25") == 100.0);
  CHECK(rep.at("f1_50") == 100.0);
}

TEST_CASE("the seed environment variable stands in for the flag") {
  const std::string bin = binary();
  REQUIRE(!bin.empty());
  TmpDir tmp("seed");
  const std::vector<std::string> common = {"--num-classes", "5", "--n-train",
                                           "3", "--n-test", "2"};
  std::vector<std::string> a = {bin, "synth", "--out", tmp.sub("a"), "--seed", "9"};
  a.insert(a.end(), common.begin(), common.end());
  std::vector<std::string> b = {"env", "CADEC_SEED=9", bin, "synth", "--out", tmp.sub("b")};
  b.insert(b.end(), common.begin(), common.end());
  std::vector<std::string> c = {bin, "synth", "--out", tmp.sub("c"), "--seed", "10"};
  c.insert(c.end(), common.begin(), common.end());
  REQUIRE(tool::run_command(a).exit_code == 0);
  REQUIRE(tool::run_command(b).exit_code == 0);
  REQUIRE(tool::run_command(c).exit_code == 0);
  CHECK(slurp(tmp.sub("a") + "/split.json") == slurp(tmp.sub("b") + "/split.json"));
  CHECK(slurp(tmp.sub("a") + "/train/seq_000.txt") ==
        slurp(tmp.sub("b") + "/train/seq_000.txt"));
  CHECK(slurp(tmp.sub("a") + "/split.json") != slurp(tmp.sub("c") + "/split.json"));
}

TEST_CASE("flags beat the config file, which beats the default") {
  const std::string bin = binary();
  REQUIRE(!bin.empty());
  TmpDir tmp("config");
  write_text_file(tmp.sub("cfg.json"), "{\"sigma\": 0.0, \"seed\": 77}\n");

  REQUIRE(tool::run_command({bin, "synth", "--out", tmp.sub("a"), "--config",
                             tmp.sub("cfg.json"), "--n-train", "2", "--n-test",
                             "1", "--num-classes", "4", "--manifest",
                             tmp.sub("m1.json")})
              .exit_code == 0);
  const auto m1 = nlohmann::json::parse(slurp(tmp.sub("m1.json")));
  CHECK(m1.at("config").at("sigma") == 0.0);
  CHECK(m1.at("seed") == 77);

  REQUIRE(tool::run_command({bin, "synth", "--out", tmp.sub("b"), "--config",
                             tmp.sub("cfg.json"), "--sigma", "2.5", "--seed",
                             "5", "--n-train", "2", "--n-test", "1",
                             "--num-classes", "4", "--manifest",
                             tmp.sub("m2.json")})
              .exit_code == 0);
  const auto m2 = nlohmann::json::parse(slurp(tmp.sub("m2.json")));
  CHECK(m2.at("config").at("sigma") == 2.5);
  CHECK(m2.at("seed") == 5);
}

TEST_CASE("a recorded manifest replays to identical outputs") {
  const std::string bin = binary();
  REQUIRE(!bin.empty());
  TmpDir tmp("replay");
  REQUIRE(tool::run_command({bin, "synth", "--out", tmp.sub("data"), "--seed",
                             "5", "--num-classes", "4", "--n-train", "3",
                             "--n-test", "2", "--manifest", tmp.sub("m.json")})
              .exit_code == 0);
  const std::string before = slurp(tmp.sub("data") + "/split.json");
  fs::remove_all(tmp.sub("data"));
  REQUIRE(tool::run_command({bin, "replay", tmp.sub("m.json")}).exit_code == 0);
  CHECK(slurp(tmp.sub("data") + "/split.json") == before);
}

TEST_CASE("the worker count does not change decode output") {
  const std::string bin = binary();
  REQUIRE(!bin.empty());
  TmpDir tmp("jobs");
  REQUIRE(tool::run_command({bin, "synth", "--out", tmp.sub("data"),
                             "--num-classes", "6", "--n-train", "5", "--n-test",
                             "4", "--seed", "3"})
              .exit_code == 0);
  REQUIRE(tool::run_command({bin, "extract", "--labels",
                             tmp.sub("data") + "/train", "--num-classes", "6",
                             "--out", tmp.sub("c.json")})
              .exit_code == 0);
  for (const char* jobs : {"1", "2"}) {
    const auto r = tool::run_command(
        {bin, "decode", "--probs", tmp.sub("data") + "/test", "--constraints",
         tmp.sub("c.json"), "--fallback", "classical", "--jobs", jobs, "--out",
         tmp.sub(std::string("out") + jobs)});
    REQUIRE(r.exit_code == 0);
  }
  const auto lhs = list_files(tmp.sub("out1"), ".txt");
  const auto rhs = list_files(tmp.sub("out2"), ".txt");
  REQUIRE(lhs.size() == 4);
  REQUIRE(lhs.size() == rhs.size());
  for (size_t i = 0; i < lhs.size(); ++i) CHECK(slurp(lhs[i]) == slurp(rhs[i]));
}

TEST_CASE("extract records class names from the mapping") {
  const std::string bin = binary();
  REQUIRE(!bin.empty());
  TmpDir tmp("mapping");
  fs::create_directories(tmp.sub("labels"));
  write_text_file(tmp.sub("labels") + "/a.txt", "walk\nwalk\nrun\n");
  write_text_file(tmp.sub("map.txt"), "walk\t0\nrun\t1\n");
  const auto r = tool::run_command({bin, "extract", "--labels", tmp.sub("labels"),
                                    "--mapping", tmp.sub("map.txt"), "--out",
                                    tmp.sub("c.json")});
  REQUIRE(r.exit_code == 0);
  const ConstraintSet cs = load_constraints(tmp.sub("c.json"));
  CHECK(cs.num_classes == 2);
  CHECK(cs.class_names == std::vector<std::string>{"walk", "run"});
  CHECK(cs.start_set == std::set<int>{0});
  CHECK(cs.end_set == std::set<int>{1});
}

TEST_CASE("bench writes a timing table") {
  const std::string bin = binary();
  REQUIRE(!bin.empty());
  TmpDir tmp("bench");
  const auto r = tool::run_command(
      {bin, "bench", "--t-list", "100", "200", "--num-classes", "8", "--edges",
       "16", "--reps", "1", "--min-time-ms", "1", "--seed", "2", "--csv",
       tmp.sub("t.csv"), "--manifest", tmp.sub("m.json")});
  REQUIRE(r.exit_code == 0);
  const std::string csv = slurp(tmp.sub("t.csv"));
  CHECK(csv.find("T,constrained_ms,classical_ms") != std::string::npos);
  CHECK(csv.find("\n100,") != std::string::npos);
  CHECK(csv.find("\n200,") != std::string::npos);
  const auto m = nlohmann::json::parse(slurp(tmp.sub("m.json")));
  CHECK(m.at("results").size() == 2);
  CHECK(m.at("slope").is_number());
}
