#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "germeval/cli.hpp"
#include "germeval/csv.hpp"
#include "germeval/manifest.hpp"
#include "germeval/prob_table.hpp"
#include "germeval/rng.hpp"
#include "germeval/svg.hpp"

using namespace germeval;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("germeval_cli_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string sub(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) { return csv::read_file(path); }

}  // namespace

TEST_CASE("csv round-trips quoted fields") {
  Rng rng(91);
  const std::vector<std::string> alphabet = {"a", "b", ",", "\"", "\n", "\r\n", ";", " ", "ä"};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> fields;
    const std::size_t n = 1 + rng.next_below(5);
    for (std::size_t f = 0; f < n; ++f) {
      std::string field;
      const std::size_t len = rng.next_below(8);
      for (std::size_t i = 0; i < len; ++i) field += alphabet[rng.next_below(alphabet.size())];
      fields.push_back(field);
    }
    // A lone trailing empty field is indistinguishable from a bare newline;
    // the generator avoids that case, the writer quotes everything else.
    if (fields.size() == 1 && fields[0].empty()) continue;
    // Fields containing bare CR round-trip as LF records; normalize expectations.
    const std::string line = csv::format_row(fields);
    const std::vector<csv::Row> rows = csv::parse(line);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].fields == fields);
  }
}

TEST_CASE("csv parser tracks record line numbers through embedded newlines") {
  const std::vector<csv::Row> rows = csv::parse("h1,h2\n\"line\nbreak\",x\nlast,y\n");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].line == 1);
  CHECK(rows[1].line == 2);
  CHECK(rows[2].line == 4);  // quoted newline consumed one source line
  CHECK(rows[1].fields[0] == "line\nbreak");
  CHECK_THROWS_AS(csv::parse("a,\"unterminated\n"), ParseError);
}

TEST_CASE("probability tables round-trip bit-exactly") {
  TempDir tmp;
  Rng rng(92);
  ProbabilityTable t;
  t.model_id = "f0_m007";
  t.head = HeadKind::kMultiLabel;
  for (int i = 0; i < 50; ++i) {
    t.sample_ids.push_back(i * 3);
    t.probs.push_back({rng.next_double(), rng.next_double(), rng.next_double()});
  }
  const std::string path = tmp.sub("t.csv");
  save_table(t, path);
  const ProbabilityTable back = load_table(path);
  CHECK(back.model_id == t.model_id);
  CHECK(back.head == t.head);
  CHECK(back.sample_ids == t.sample_ids);
  REQUIRE(back.probs.size() == t.probs.size());
  for (std::size_t i = 0; i < t.probs.size(); ++i) {
    for (std::size_t c = 0; c < 3; ++c) CHECK(back.probs[i][c] == t.probs[i][c]);
  }
}

TEST_CASE("single-label tables tag their task and leave other columns empty") {
  TempDir tmp;
  ProbabilityTable t;
  t.model_id = "m_fact";
  t.head = HeadKind::kSingleLabel;
  t.task = Task::kFact;
  t.sample_ids = {5, 6};
  t.probs = {{std::nan(""), std::nan(""), 0.25}, {std::nan(""), std::nan(""), 0.75}};
  const std::string path = tmp.sub("sl.csv");
  save_table(t, path);

  const std::string raw = slurp(path);
  CHECK(raw.find("# head: single-label\n") != std::string::npos);
  CHECK(raw.find("# task: fact\n") != std::string::npos);
  CHECK(raw.find(",,") != std::string::npos);  // empty p_toxic/p_engaging cells

  const ProbabilityTable back = load_table(path);
  CHECK(back.head == HeadKind::kSingleLabel);
  CHECK(back.task == Task::kFact);
  CHECK(back.probs[0][2] == 0.25);
  CHECK(std::isnan(back.probs[0][0]));
}

TEST_CASE("table ingestion validates layout and probability range") {
  TempDir tmp;
  const std::string bad_cols = tmp.sub("bad.csv");
  csv::write_file(bad_cols, "foo,bar\n1,2\n");
  CHECK_THROWS_AS(load_table(bad_cols), SchemaError);

  const std::string bad_prob = tmp.sub("badp.csv");
  csv::write_file(bad_prob, "model_id,sample_id,p_toxic,p_engaging,p_fact\nm,1,1.5,0.5,0.5\n");
  CHECK_THROWS_AS(load_table(bad_prob), ParseError);

  const std::string mixed = tmp.sub("mixed.csv");
  csv::write_file(mixed, "model_id,sample_id,p_toxic,p_engaging,p_fact\na,1,0.5,0.5,0.5\nb,2,0.5,0.5,0.5\n");
  CHECK_THROWS_AS(load_table(mixed), ParseError);
}

TEST_CASE("align_table reorders by id and lists offenders") {
  ProbabilityTable t;
  t.model_id = "m";
  t.head = HeadKind::kMultiLabel;
  t.sample_ids = {3, 1, 2};
  t.probs = {{0.3, 0.3, 0.3}, {0.1, 0.1, 0.1}, {0.2, 0.2, 0.2}};
  const ProbabilityTable aligned = align_table(t, {1, 2, 3});
  CHECK(aligned.probs[0][0] == 0.1);
  CHECK(aligned.probs[2][0] == 0.3);
  CHECK_THROWS_WITH(align_table(t, {1, 2, 9}), Catch::Matchers::ContainsSubstring("9"));
}

TEST_CASE("svg chart embeds data and draws one polyline per series") {
  svg::Series a;
  a.label = "mix";
  a.x = {1, 2, 5, 10};
  a.y = {0.70, 0.72, 0.73, 0.735};
  a.band = {0.01, 0.008, 0.005, 0.004};
  svg::Series b;
  b.label = "pure";
  b.x = {1, 2, 5, 10};
  b.y = {0.69, 0.71, 0.725, 0.733};
  const std::string chart = svg::line_chart({a, b});
  CHECK(chart.find("<svg") == 0);
  CHECK(chart.find("<metadata>") != std::string::npos);
  CHECK(chart.find("mix") != std::string::npos);
  CHECK(chart.find("<polygon") != std::string::npos);  // std band
  std::size_t polylines = 0;
  for (std::size_t pos = 0; (pos = chart.find("<polyline", pos)) != std::string::npos; ++pos) {
    ++polylines;
  }
  CHECK(polylines == 2);  // one data line per series
}

TEST_CASE("manifest hashes configs canonically") {
  const nlohmann::json a = {{"x", 1}, {"y", "z"}};
  const nlohmann::json b = {{"y", "z"}, {"x", 1}};
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(nlohmann::json{{"x", 2}, {"y", "z"}}));
}

namespace {

/// A small learnable corpus: signal words decide the labels, with a few
/// duplicated rows to exercise dedup.
std::string toy_corpus(std::size_t n) {
  Rng rng(93);
  const std::vector<std::string> fillers = {"das", "ist", "ein", "kommentar", "zum",
                                            "thema", "heute", "wirklich", "sehr"};
  std::string out = "comment_text,Sub1_Toxic,Sub2_Engaging,Sub3_FactClaiming\n";
  for (std::size_t i = 0; i < n; ++i) {
    const bool toxic = rng.next_below(3) == 0;
    const bool engaging = rng.next_below(3) == 0;
    const bool fact = rng.next_below(3) == 0;
    std::string text;
    for (int w = 0; w < 6; ++w) text += fillers[rng.next_below(fillers.size())] + " ";
    if (toxic) text += "unverschämt blödsinn ";
    if (engaging) text += "danke interessante frage ";
    if (fact) text += "laut studie prozent ";
    text += "nr" + std::to_string(i);
    out += csv::format_row({text, toxic ? "1" : "0", engaging ? "1" : "0", fact ? "1" : "0"});
  }
  out += "das ist ein kommentar,0,0,0\ndas ist ein kommentar,0,0,0\n";
  return out;
}

int run_cli(const std::vector<std::string>& args) { return cli::run(args); }

}  // namespace

TEST_CASE("cli pipeline runs end to end and is replayable") {
  TempDir tmp;
  const std::string raw = tmp.sub("raw.csv");
  csv::write_file(raw, toy_corpus(60));

  // preprocess
  const std::string pre_dir = tmp.sub("pre");
  REQUIRE(run_cli({"preprocess", "--input", raw, "--out", pre_dir}) == 0);
  const std::string dataset = pre_dir + "/dataset.csv";
  CHECK(fs::exists(dataset));
  const nlohmann::json report = nlohmann::json::parse(slurp(pre_dir + "/preprocess_report.json"));
  CHECK(report.at("input_rows").get<int>() == 62);
  CHECK(report.at("after_dedup").get<int>() == 61);  // one duplicated row removed

  // preprocess is idempotent at the file level
  const std::string pre2_dir = tmp.sub("pre2");
  REQUIRE(run_cli({"preprocess", "--input", dataset, "--out", pre2_dir}) == 0);
  CHECK(slurp(pre2_dir + "/dataset.csv") == slurp(dataset));

  // split
  const std::string split_dir = tmp.sub("split");
  REQUIRE(run_cli({"split", "--input", dataset, "--k", "3", "--fraction", "0.1", "--seed", "11",
                   "--out", split_dir}) == 0);
  const std::string folds = split_dir + "/folds.json";
  CHECK(fs::exists(folds));

  // train-pool (small featurizer for speed)
  const std::string pool_dir = tmp.sub("pool");
  REQUIRE(run_cli({"train-pool", "--input", dataset, "--folds", folds, "--count", "2", "--epochs",
                   "2", "--eval-every", "4", "--buckets", "1024", "--ngram-max", "3",
                   "--learning-rate", "0.3", "--seed", "21", "--out", pool_dir}) == 0);
  CHECK(fs::exists(pool_dir + "/pool.json"));
  CHECK(fs::exists(pool_dir + "/models/f0_m000.gem"));
  CHECK(fs::exists(pool_dir + "/tables/f0_m000.val.csv"));
  CHECK(fs::exists(pool_dir + "/tables/f0_m000.es.csv"));

  // predict writes an ingestable table for a persisted snapshot
  const std::string predict_dir = tmp.sub("predict");
  REQUIRE(run_cli({"predict", "--model", pool_dir + "/models/f0_m000.gem", "--input", dataset,
                   "--out", predict_dir}) == 0);
  const ProbabilityTable predicted = load_table(predict_dir + "/f0_m000.probs.csv");
  CHECK(predicted.size() == 61);

  // ensemble-eval over the two fold-0 member tables
  const std::string eval_dir = tmp.sub("eval");
  REQUIRE(run_cli({"ensemble-eval", "--tables", pool_dir + "/tables/f0_m000.val.csv", "--tables",
                   pool_dir + "/tables/f0_m001.val.csv", "--calibration-tables",
                   pool_dir + "/tables/f0_m000.es.csv", "--calibration-tables",
                   pool_dir + "/tables/f0_m001.es.csv", "--gold", dataset, "--out", eval_dir}) ==
          0);
  CHECK(fs::exists(eval_dir + "/eval_report.json"));
  CHECK(fs::exists(eval_dir + "/eval_report.csv"));
  CHECK(fs::exists(eval_dir + "/predictions.csv"));
  const nlohmann::json eval_report = nlohmann::json::parse(slurp(eval_dir + "/eval_report.json"));
  CHECK(eval_report.at("macro_f1").get<double>() >= 0.0);
  CHECK(eval_report.contains("thresholds"));

  // pool-mode evaluation
  const std::string pool_eval_dir = tmp.sub("pool_eval");
  REQUIRE(run_cli({"ensemble-eval", "--pool", pool_dir, "--folds", folds, "--gold", dataset,
                   "--out", pool_eval_dir}) == 0);
  const nlohmann::json pool_report =
      nlohmann::json::parse(slurp(pool_eval_dir + "/eval_report.json"));
  CHECK(pool_report.at("per_fold").size() == 3);

  // bootstrap
  const std::string bs_dir = tmp.sub("bs");
  REQUIRE(run_cli({"bootstrap", "--pool", pool_dir, "--gold", dataset, "--sizes", "1,2", "--samples",
                   "25", "--seed", "31", "--out", bs_dir}) == 0);
  const std::string summary = bs_dir + "/bootstrap_summary.csv";
  CHECK(fs::exists(summary));

  // plot
  const std::string plot_dir = tmp.sub("plot");
  REQUIRE(run_cli({"plot", "--summary", summary, "--out", plot_dir}) == 0);
  const std::string chart = slurp(plot_dir + "/figure.svg");
  CHECK(chart.find("<svg") == 0);

  // Replay: the same commands into fresh directories produce byte-identical
  // artifacts (manifests differ only by timestamp).
  const std::string pool_dir2 = tmp.sub("pool2");
  REQUIRE(run_cli({"train-pool", "--input", dataset, "--folds", folds, "--count", "2", "--epochs",
                   "2", "--eval-every", "4", "--buckets", "1024", "--ngram-max", "3",
                   "--learning-rate", "0.3", "--seed", "21", "--out", pool_dir2}) == 0);
  CHECK(slurp(pool_dir2 + "/tables/f0_m001.val.csv") == slurp(pool_dir + "/tables/f0_m001.val.csv"));
  CHECK(slurp(pool_dir2 + "/models/f0_m000.gem") == slurp(pool_dir + "/models/f0_m000.gem"));

  const std::string bs_dir2 = tmp.sub("bs2");
  REQUIRE(run_cli({"bootstrap", "--pool", pool_dir2, "--gold", dataset, "--sizes", "1,2",
                   "--samples", "25", "--seed", "31", "--out", bs_dir2}) == 0);
  CHECK(slurp(bs_dir2 + "/bootstrap_summary.csv") == slurp(summary));
}

TEST_CASE("cli reports actionable errors with nonzero status") {
  TempDir tmp;
  CHECK(run_cli({"preprocess", "--input", tmp.sub("missing.csv"), "--out", tmp.sub("o")}) != 0);
  CHECK(run_cli({"ensemble-eval", "--out", tmp.sub("o2")}) != 0);
  // Unknown flag is a parse error.
  CHECK(run_cli({"preprocess", "--no-such-flag"}) != 0);
}

TEST_CASE("cli reads defaults from a config file with flag overrides") {
  TempDir tmp;
  const std::string raw = tmp.sub("raw.csv");
  csv::write_file(raw, toy_corpus(30));
  const std::string cfg = tmp.sub("run.ini");
  csv::write_file(cfg, "[split]\nk=3\nfraction=0.1\nseed=5\n");

  const std::string out1 = tmp.sub("o1");
  REQUIRE(run_cli({"--config", cfg, "split", "--input", raw, "--out", out1}) == 0);
  const FoldPlan p1 = load_fold_plan(out1 + "/folds.json");
  CHECK(p1.k == 3);
  CHECK(p1.seed == 5);

  // Flags override the file.
  const std::string out2 = tmp.sub("o2");
  REQUIRE(run_cli({"--config", cfg, "split", "--input", raw, "--k", "4", "--out", out2}) == 0);
  CHECK(load_fold_plan(out2 + "/folds.json").k == 4);
}
