#include <doctest.h>
#include "cadec/constraints.hpp"
#include "cadec/errors.hpp"
#include "cadec/io.hpp"
#include "cadec/synth.hpp"
#include <nlohmann/json.hpp>
#include <filesystem>
#include <string>
#include <unistd.h>

using namespace cadec;
namespace fs = std::filesystem;

namespace {

struct TmpDir {
  fs::path path;
  TmpDir() {
    path = fs::temp_directory_path() /
           ("cadec_io_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TmpDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

ConstraintSet sample_constraints() {
  const std::vector<LabelSeq> corpus = {{0, 0, 1, 1, 2, 2}, {0, 2, 2, 2}};
  ConstraintSet cs = extract_constraints(corpus, 3, 0.05);
  cs.class_names = {"walk", "run", "rest"};
  return cs;
}

}  // namespace

TEST_CASE("constraint sets survive a json round trip") {
  const ConstraintSet cs = sample_constraints();
  const std::string text = constraints_to_json(cs);
  const ConstraintSet back = constraints_from_json(text);
  CHECK(back == cs);

  TmpDir tmp;
  save_constraints(cs, tmp.file("c.json"));
  CHECK(load_constraints(tmp.file("c.json")) == cs);
}

TEST_CASE("constraint json is validated on load") {
  const ConstraintSet cs = sample_constraints();
  auto j = nlohmann::json::parse(constraints_to_json(cs));

  auto broken = j;
  broken.erase("end_set");
  try {
    constraints_from_json(broken.dump());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("end_set") != std::string::npos);
  }

  broken = j;
  broken["transitions"][0]["conf"] = 1.2;
  CHECK_THROWS_AS(constraints_from_json(broken.dump()), ParseError);

  broken = j;
  broken["transitions"][0]["conf"] = 0.0;
  CHECK_THROWS_AS(constraints_from_json(broken.dump()), ParseError);

  broken = j;
  broken["version"] = 2;
  CHECK_THROWS_AS(constraints_from_json(broken.dump()), SchemaVersionMismatch);

  broken = j;
  broken["start_set"].push_back(7);
  CHECK_THROWS_AS(constraints_from_json(broken.dump()), ParseError);

  broken = j;
  broken["durations"][0]["d_min"] = 0.9;
  broken["durations"][0]["d_max"] = 0.2;
  CHECK_THROWS_AS(constraints_from_json(broken.dump()), ParseError);

  CHECK_THROWS_AS(constraints_from_json("not json at all"), ParseError);
}

TEST_CASE("label files round trip through names and through indices") {
  TmpDir tmp;
  const LabelSeq labels = {0, 0, 2, 1, 1};

  NameMap map;
  map.names = {"walk", "run", "rest"};
  map.index = {{"walk", 0}, {"run", 1}, {"rest", 2}};
  write_label_file(tmp.file("named.txt"), labels, map);
  CHECK(read_label_file(tmp.file("named.txt"), map) == labels);
  CHECK(read_text_file(tmp.file("named.txt")) ==
        "walk\nwalk\nrest\nrun\nrun\n");

  write_label_file(tmp.file("plain.txt"), labels);
  CHECK(read_label_file(tmp.file("plain.txt"), {}) == labels);
  CHECK(read_text_file(tmp.file("plain.txt")) == "0\n0\n2\n1\n1\n");

  // mixed tokens resolve through the map first, then as integers
  write_text_file(tmp.file("mixed.txt"), "walk\n2\nrun\n");
  CHECK(read_label_file(tmp.file("mixed.txt"), map) == LabelSeq{0, 2, 1});

  write_text_file(tmp.file("bad.txt"), "walk\nbogus\n");
  CHECK_THROWS_AS(read_label_file(tmp.file("bad.txt"), map), ParseError);

  write_text_file(tmp.file("range.txt"), "0\n5\n");
  CHECK_THROWS_AS(read_label_file(tmp.file("range.txt"), {}, 3), ParseError);

  write_text_file(tmp.file("empty.txt"), "");
  CHECK_THROWS_AS(read_label_file(tmp.file("empty.txt"), {}), ParseError);
}

TEST_CASE("mapping files reject duplicates and malformed lines") {
  TmpDir tmp;
  write_text_file(tmp.file("map.txt"), "walk\t0\nrun\t1\nrest\t2\n");
  const NameMap map = read_mapping(tmp.file("map.txt"));
  CHECK(map.size() == 3);
  CHECK(map.names[1] == "run");
  CHECK(map.index.at("rest") == 2);

  write_text_file(tmp.file("dup.txt"), "walk\t0\nwalk\t1\n");
  CHECK_THROWS_AS(read_mapping(tmp.file("dup.txt")), ParseError);

  write_text_file(tmp.file("dupidx.txt"), "walk\t0\nrun\t0\n");
  CHECK_THROWS_AS(read_mapping(tmp.file("dupidx.txt")), ParseError);

  write_text_file(tmp.file("noidx.txt"), "walk\n");
  CHECK_THROWS_AS(read_mapping(tmp.file("noidx.txt")), ParseError);
}

TEST_CASE("csv matrices round trip exactly") {
  TmpDir tmp;
  GeneratorSpec spec = GeneratorSpec::defaults(5);
  Rng rng(17);
  const auto [gt, P] = generate_sequence(spec, rng);
  write_prob_csv(tmp.file("p.csv"), P);
  const ProbMatrix back = read_prob_matrix(tmp.file("p.csv"));
  REQUIRE(back.rows() == P.rows());
  REQUIRE(back.cols() == P.cols());
  CHECK(back.cwiseEqual(P).all());
}

TEST_CASE("binary matrices round trip at single precision") {
  TmpDir tmp;
  GeneratorSpec spec = GeneratorSpec::defaults(4);
  Rng rng(18);
  const auto [gt, P] = generate_sequence(spec, rng);
  write_prob_binary(tmp.file("p.probs"), P);
  const ProbMatrix back = read_prob_matrix(tmp.file("p.probs"));
  REQUIRE(back.rows() == P.rows());
  REQUIRE(back.cols() == P.cols());
  for (int t = 0; t < static_cast<int>(P.rows()); ++t)
    for (int c = 0; c < static_cast<int>(P.cols()); ++c)
      CHECK(back(t, c) == static_cast<double>(static_cast<float>(P(t, c))));
}

TEST_CASE("the reader tells csv and binary apart by the magic") {
  TmpDir tmp;
  ProbMatrix P(2, 2);
  P << 0.75, 0.25, 0.5, 0.5;
  write_prob_binary(tmp.file("a"), P);
  write_prob_csv(tmp.file("b"), P);
  CHECK(read_prob_matrix(tmp.file("a")).cwiseEqual(P).all());
  CHECK(read_prob_matrix(tmp.file("b")).cwiseEqual(P).all());
}

TEST_CASE("malformed matrices are rejected with parse errors") {
  TmpDir tmp;
  write_text_file(tmp.file("neg.csv"), "0.5,0.5\n-0.1,1.1\n");
  CHECK_THROWS_AS(read_prob_matrix(tmp.file("neg.csv")), ParseError);

  write_text_file(tmp.file("nan.csv"), "0.5,0.5\nnan,0.5\n");
  CHECK_THROWS_AS(read_prob_matrix(tmp.file("nan.csv")), ParseError);

  write_text_file(tmp.file("ragged.csv"), "0.5,0.5\n0.5\n");
  CHECK_THROWS_AS(read_prob_matrix(tmp.file("ragged.csv")), ParseError);

  write_text_file(tmp.file("junk.csv"), "0.5,abc\n");
  CHECK_THROWS_AS(read_prob_matrix(tmp.file("junk.csv")), ParseError);

  // truncated binary payload
  ProbMatrix P(2, 2);
  P << 0.75, 0.25, 0.5, 0.5;
  write_prob_binary(tmp.file("t.probs"), P);
  std::string raw = read_text_file(tmp.file("t.probs"));
  raw.resize(raw.size() - 4);
  write_text_file(tmp.file("t.probs"), raw);
  CHECK_THROWS_AS(read_prob_matrix(tmp.file("t.probs")), ParseError);

  // wrong binary version
  write_prob_binary(tmp.file("v.probs"), P);
  raw = read_text_file(tmp.file("v.probs"));
  raw[4] = 2;
  write_text_file(tmp.file("v.probs"), raw);
  CHECK_THROWS_AS(read_prob_matrix(tmp.file("v.probs")), SchemaVersionMismatch);

  CHECK_THROWS_AS(read_prob_matrix(tmp.file("missing.csv")), ParseError);
}

TEST_CASE("directory listings are filtered and sorted") {
  TmpDir tmp;
  write_text_file(tmp.file("b.txt"), "x");
  write_text_file(tmp.file("a.txt"), "x");
  write_text_file(tmp.file("c.csv"), "x");
  const auto txt = list_files(tmp.path.string(), ".txt");
  REQUIRE(txt.size() == 2);
  CHECK(fs::path(txt[0]).filename() == "a.txt");
  CHECK(fs::path(txt[1]).filename() == "b.txt");
  const auto all = list_files(tmp.path.string());
  CHECK(all.size() == 3);
  CHECK_THROWS_AS(list_files(tmp.file("nope")), ParseError);
}
