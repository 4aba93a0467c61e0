#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "sqi/csv.hpp"
#include "sqi/error.hpp"
#include "sqi/harness.hpp"
#include "temp_dir.hpp"

using namespace sqi;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

int run_cmd(const std::string& cmd, const test::TempDir& dir, const std::string& name, json config, const fs::path& out,
            std::size_t jobs = 1) {
  const auto cfg = dir.write(name, config.dump());
  harness::Options o;
  o.config = cfg;
  o.out = out;
  o.jobs = jobs;
  std::ostringstream log;
  return harness::run(cmd, o, log);
}

// Small synthetic train/test pair written into dir/data.
void make_data(const test::TempDir& dir, std::size_t n = 400, std::size_t n_test = 200) {
  json c{{"config_version", 1}, {"seed", 5}, {"n", n}, {"n_test", n_test}};
  REQUIRE(run_cmd("synth", dir, "synth.json", c, dir / "data") == 0);
}

json quick_train() {
  return json{{"config_version", 1},
              {"seed", 2},
              {"train_manifest", "data/train.csv"},
              {"test_manifest", "data/test.csv"},
              {"training", {{"max_epochs", 8}, {"patience", 3}}}};
}

json read_json(const fs::path& p) { return json::parse(test::read_file(p)); }

// Header followed by the data rows.
std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  auto t = csv::read_file(p);
  t.rows.insert(t.rows.begin(), t.header);
  return t.rows;
}

}  // namespace

TEST_CASE("config schema") {
  test::TempDir dir("harness");
  make_data(dir);
  auto c = quick_train();
  c["learning_rat"] = 0.01;
  CHECK_THROWS_AS(run_cmd("train", dir, "a.json", c, dir / "o1"), InvalidArgument);
  c = quick_train();
  c["training"]["epochs"] = 3;
  CHECK_THROWS_AS(run_cmd("train", dir, "b.json", c, dir / "o2"), InvalidArgument);
  c = quick_train();
  c["config_version"] = 2;
  CHECK_THROWS_AS(run_cmd("train", dir, "c.json", c, dir / "o3"), InvalidArgument);
  c.erase("config_version");
  CHECK_THROWS_AS(run_cmd("train", dir, "d.json", c, dir / "o4"), InvalidArgument);
  c = quick_train();
  c["seed"] = -1;
  CHECK_THROWS_AS(run_cmd("train", dir, "e.json", c, dir / "o5"), InvalidArgument);
  c = quick_train();
  c["model"] = "forest";
  CHECK_THROWS_AS(run_cmd("train", dir, "f.json", c, dir / "o6"), InvalidArgument);
  dir.write("bad.json", "{\"config_version\": 1,");
  harness::Options o;
  o.config = dir / "bad.json";
  o.out = dir / "o7";
  std::ostringstream log;
  CHECK_THROWS_AS(harness::run("train", o, log), Error);
  CHECK_THROWS_AS(harness::run("fit", o, log), InvalidArgument);
  CHECK(harness::command_names().size() == 7);
}

TEST_CASE("train and eval are byte-identical on rerun") {
  test::TempDir dir("harness");
  make_data(dir);
  REQUIRE(run_cmd("train", dir, "t.json", quick_train(), dir / "run1") == 0);
  REQUIRE(run_cmd("train", dir, "t.json", quick_train(), dir / "run2", 2) == 0);
  for (const char* f : {"checkpoint.json", "history.csv", "predictions.csv", "report.json"}) {
    CHECK(test::read_file(dir / "run1" / f) == test::read_file(dir / "run2" / f));
  }
  const auto report = read_json(dir / "run1" / "report.json");
  CHECK(report["command"] == "train");
  CHECK(report["inputs"].contains("train_manifest"));
  CHECK(report["results"]["test"]["n"] == 200);
  CHECK(report["results"]["test"]["quality"]["pcc"].get<double>() > 0.5);
  const auto preds = read_csv(dir / "run1" / "predictions.csv");
  CHECK(preds[0] == std::vector<std::string>{"utt_id", "quality_pred", "quality_true", "intelligibility_pred",
                                             "intelligibility_true"});
  CHECK(preds.size() == 201);

  json e{{"config_version", 1}, {"checkpoint", "run1/checkpoint.json"}, {"test_manifest", "data/test.csv"}};
  REQUIRE(run_cmd("eval", dir, "e.json", e, dir / "eval1") == 0);
  REQUIRE(run_cmd("eval", dir, "e.json", e, dir / "eval2") == 0);
  CHECK(test::read_file(dir / "eval1" / "report.json") == test::read_file(dir / "eval2" / "report.json"));
  // eval reproduces the metrics train reported
  CHECK(read_json(dir / "eval1" / "report.json")["results"]["test"] == report["results"]["test"]);
  CHECK(test::read_file(dir / "eval1" / "predictions.csv") == test::read_file(dir / "run1" / "predictions.csv"));

  // --seed overrides the config seed
  harness::Options o;
  o.config = dir / "t.json";
  o.out = dir / "run3";
  o.seed = 99;
  std::ostringstream log;
  REQUIRE(harness::run("train", o, log) == 0);
  CHECK(read_json(dir / "run3" / "report.json")["config"]["seed"] == 99);
  CHECK(test::read_file(dir / "run3" / "checkpoint.json") != test::read_file(dir / "run1" / "checkpoint.json"));
}

TEST_CASE("linear model and augmented variant through the CLI") {
  test::TempDir dir("harness");
  make_data(dir);
  auto c = quick_train();
  c["model"] = "linear";
  REQUIRE(run_cmd("train", dir, "l.json", c, dir / "lin") == 0);
  CHECK(read_json(dir / "lin" / "checkpoint.json")["kind"] == "linear");
  CHECK_FALSE(fs::exists(dir / "lin" / "history.csv"));
  c = quick_train();
  c["variant"] = "augmented";
  REQUIRE(run_cmd("train", dir, "a.json", c, dir / "aug") == 0);
  const auto r = read_json(dir / "aug" / "report.json")["results"]["test"];
  CHECK_FALSE(r.contains("quality"));
  CHECK(r.contains("intelligibility"));
}

TEST_CASE("sweep") {
  test::TempDir dir("harness");
  make_data(dir);
  auto c = quick_train();
  c["fractions"] = {0.25, 1.0};
  c["seeds"] = {0, 1};
  REQUIRE(run_cmd("sweep", dir, "s.json", c, dir / "s1") == 0);
  REQUIRE(run_cmd("sweep", dir, "s.json", c, dir / "s2", 2) == 0);
  for (const char* f : {"sweep.csv", "sweep_runs.csv", "report.json"}) {
    CHECK(test::read_file(dir / "s1" / f) == test::read_file(dir / "s2" / f));
  }
  const auto rows = read_csv(dir / "s1" / "sweep.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"fraction", "n_train", "quality_pcc", "quality_srcc", "quality_pc",
                                            "intelligibility_pcc", "intelligibility_srcc", "intelligibility_pc"});
  CHECK(rows[2][0] == "1");
  CHECK(std::stod(rows[2][4]) == 0.0);
  CHECK(std::stod(rows[2][7]) == 0.0);
  CHECK(read_csv(dir / "s1" / "sweep_runs.csv").size() == 5);

  c["fractions"] = {0.25, 0.5};
  CHECK_THROWS_AS(run_cmd("sweep", dir, "bad.json", c, dir / "s3"), InvalidArgument);
}

TEST_CASE("synth audio round trip through measure") {
  test::TempDir dir("harness");
  json s{{"config_version", 1}, {"seed", 1}, {"n", 100}, {"with_audio", true}, {"audio_duration_s", 1.0},
         {"audio_rate_hz", 10000}};
  REQUIRE(run_cmd("synth", dir, "s.json", s, dir / "syn") == 0);
  CHECK(fs::exists(dir / "syn" / "wav" / "syn00000_clean.wav"));
  const auto text = test::read_file(dir / "syn" / "train.csv");
  std::size_t pos = 0;
  for (int k = 0; k < 11; ++k) pos = text.find('\n', pos) + 1;
  dir.write("syn/ten.csv", text.substr(0, pos));

  json m{{"config_version", 1}, {"manifest", "syn/ten.csv"}};
  REQUIRE(run_cmd("measure", dir, "m.json", m, dir / "meas", 2) == 0);
  const auto rows = read_csv(dir / "meas" / "measures.csv");
  REQUIRE(rows.size() == 11);
  CHECK(rows[0] == std::vector<std::string>{"utt_id", "ncm", "stoi", "estoi"});
  for (std::size_t r = 1; r < rows.size(); ++r) {
    CHECK(rows[r][0] == "syn0000" + std::to_string(r - 1));
    for (int k = 1; k <= 3; ++k) {
      CHECK(std::stod(rows[r][k]) <= 1.0);
      CHECK(std::stod(rows[r][k]) > -1.0);
    }
  }
  CHECK(read_csv(dir / "meas" / "failures.csv").size() == 1);

  // identical clean and degraded files
  dir.write("same.csv",
            "utt_id,clean_path,degraded_path,subj_quality,subj_intelligibility\n"
            "x,syn/wav/syn00004_clean.wav,syn/wav/syn00004_clean.wav,3,5\n");
  REQUIRE(run_cmd("measure", dir, "same.json", json{{"config_version", 1}, {"manifest", "same.csv"}}, dir / "same") == 0);
  const auto same = read_csv(dir / "same" / "measures.csv");
  for (int k = 1; k <= 3; ++k) CHECK(std::stod(same[1][k]) == doctest::Approx(1.0).epsilon(1e-9));

  // a missing file is reported per row and turns the exit code nonzero
  dir.write("broken.csv",
            "utt_id,clean_path,degraded_path,subj_quality,subj_intelligibility\n"
            "good,syn/wav/syn00004_clean.wav,syn/wav/syn00004_degraded.wav,3,5\n"
            "bad,syn/wav/nothing.wav,syn/wav/syn00004_degraded.wav,3,5\n");
  CHECK(run_cmd("measure", dir, "broken.json", json{{"config_version", 1}, {"manifest", "broken.csv"}}, dir / "br") ==
        1);
  CHECK(read_csv(dir / "br" / "measures.csv").size() == 2);
  const auto failures = read_csv(dir / "br" / "failures.csv");
  REQUIRE(failures.size() == 2);
  CHECK(failures[1][0] == "bad");
}

TEST_CASE("correlate") {
  test::TempDir dir("harness");
  make_data(dir, 500, 0);
  json c{{"config_version", 1}, {"manifest", "data/train.csv"}, {"scatter", json::array({json::array({"stoi", "subj_intelligibility"})})}};
  REQUIRE(run_cmd("correlate", dir, "c.json", c, dir / "cor") == 0);
  const auto rows = read_csv(dir / "cor" / "correlation.csv");
  REQUIRE(rows.size() == 15);
  REQUIRE(rows[0].size() == 15);
  for (std::size_t k = 1; k < 15; ++k) CHECK(std::stod(rows[k][k]) == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t a = 1; a < 15; ++a)
    for (std::size_t b = 1; b < 15; ++b) CHECK(rows[a][b] == rows[b][a]);
  const auto scatter = read_csv(dir / "cor" / "scatter_stoi_vs_subj_intelligibility.csv");
  CHECK(scatter.size() == 501);
  const auto report = read_json(dir / "cor" / "report.json")["results"];
  CHECK(report["pcc_quality_intelligibility"].get<double>() > 0.5);
  CHECK(report["quality_measures_vs_subj_intelligibility"].size() == 8);
  c["scatter"] = json::array({json::array({"stoi", "polqa"})});
  CHECK_THROWS_AS(run_cmd("correlate", dir, "bad.json", c, dir / "cor2"), InvalidArgument);
}

TEST_CASE("probe through the CLI") {
  test::TempDir dir("harness");
  make_data(dir);
  REQUIRE(run_cmd("train", dir, "t.json", quick_train(), dir / "model") == 0);
  json p{{"config_version", 1}, {"seed", 4},          {"checkpoint", "model/checkpoint.json"},
         {"train_manifest", "data/train.csv"}, {"measures", {"stoi", "pesq"}}, {"repetitions", 3},
         {"samples_per_rep", 400},           {"bins", 20}};
  REQUIRE(run_cmd("probe", dir, "p.json", p, dir / "p1") == 0);
  REQUIRE(run_cmd("probe", dir, "p.json", p, dir / "p2", 3) == 0);
  for (const char* f : {"probe_stoi.csv", "probe_pesq.csv", "report.json"}) {
    CHECK(test::read_file(dir / "p1" / f) == test::read_file(dir / "p2" / f));
  }
  const auto rows = read_csv(dir / "p1" / "probe_stoi.csv");
  CHECK(rows.size() == 21);
  CHECK(rows[1][0] == "stoi");
  p["measures"] = {"polqa"};
  CHECK_THROWS_AS(run_cmd("probe", dir, "bad.json", p, dir / "p3"), InvalidArgument);
}

TEST_CASE("file hashing") {
  CHECK(harness::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(harness::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  test::TempDir dir("harness");
  CHECK(harness::hash_file(dir.write("x.txt", "a")) == "af63dc4c8601ec8c");
}
