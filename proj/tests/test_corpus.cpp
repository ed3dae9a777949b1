#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <set>
#include <string>
#include <unistd.h>

#include "germeval/csv.hpp"
#include "germeval/dataset.hpp"
#include "germeval/folds.hpp"

using namespace germeval;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("germeval_test_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name, const std::string& content) const {
    const std::string p = (path / name).string();
    csv::write_file(p, content);
    return p;
  }
};

Dataset from_texts(const std::vector<std::string>& texts) {
  Dataset d;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    d.comments.push_back({static_cast<std::int64_t>(i), texts[i], std::nullopt});
  }
  return d;
}

}  // namespace

TEST_CASE("load_dataset reads the default schema") {
  TempDir tmp;
  const std::string path = tmp.file(
      "train.csv",
      "comment_text,Sub1_Toxic,Sub2_Engaging,Sub3_FactClaiming\n"
      "\"Hallo, Welt\",1,0,0\n"
      "Zweiter Kommentar,0,1,1\n"
      "Dritter,0,0,0\n");
  const Dataset d = load_dataset(path);
  REQUIRE(d.size() == 3);
  CHECK(d.labeled());
  CHECK(d.comments[0].text == "Hallo, Welt");
  CHECK(d.comments[0].id == 0);
  CHECK(d.comments[0].labels == LabelTriple{true, false, false});
  CHECK(d.comments[1].labels == LabelTriple{false, true, true});
  CHECK(d.comments[2].labels == LabelTriple{false, false, false});
}

TEST_CASE("load_dataset handles header-only and unlabeled files") {
  TempDir tmp;
  const Dataset empty = load_dataset(
      tmp.file("empty.csv", "comment_text,Sub1_Toxic,Sub2_Engaging,Sub3_FactClaiming\n"));
  CHECK(empty.size() == 0);

  const Dataset test_data =
      load_dataset(tmp.file("test.csv", "comment_text\nKommentar eins\nKommentar zwei\n"));
  REQUIRE(test_data.size() == 2);
  CHECK_FALSE(test_data.labeled());
}

TEST_CASE("load_dataset errors name the offender") {
  TempDir tmp;
  CHECK_THROWS_AS(load_dataset(tmp.file("bad.csv", "foo,bar\n1,2\n")), SchemaError);
  CHECK_THROWS_WITH(load_dataset(tmp.file("bad2.csv", "foo,bar\n1,2\n")),
                    Catch::Matchers::ContainsSubstring("comment_text"));
  // Partial label sets are rejected.
  CHECK_THROWS_AS(load_dataset(tmp.file("partial.csv", "comment_text,Sub1_Toxic\nx,1\n")),
                  SchemaError);
  // Bad label cell carries the line number.
  CHECK_THROWS_WITH(
      load_dataset(tmp.file("cell.csv",
                            "comment_text,Sub1_Toxic,Sub2_Engaging,Sub3_FactClaiming\n"
                            "ok,1,0,0\nbroken,2,0,0\n")),
      Catch::Matchers::ContainsSubstring("line 3"));
}

TEST_CASE("load_dataset respects a remapped schema") {
  TempDir tmp;
  DatasetSchema schema;
  schema.text_column = "text";
  schema.label_columns = {"tox", "eng", "fact"};
  schema.delimiter = '\t';
  const Dataset d =
      load_dataset(tmp.file("mapped.tsv", "text\ttox\teng\tfact\nhallo\t1\t1\t0\n"), schema);
  REQUIRE(d.size() == 1);
  CHECK(d.comments[0].labels == LabelTriple{true, true, false});
}

TEST_CASE("dataset round-trips through save and load") {
  TempDir tmp;
  Dataset d = from_texts({"eins", "zwei, mit Komma", "drei \"zitiert\""});
  for (auto& c : d.comments) c.labels = LabelTriple{true, false, true};
  d.comments[1].id = 17;
  const std::string path = (tmp.path / "roundtrip.csv").string();
  save_dataset(d, path);
  const Dataset back = load_dataset(path);
  REQUIRE(back.size() == 3);
  CHECK(back.comments[1].id == 17);
  CHECK(back.comments[1].text == "zwei, mit Komma");
  CHECK(back.comments[2].text == "drei \"zitiert\"");
}

TEST_CASE("deduplicate keeps first occurrences in order") {
  const Dataset d = deduplicate(from_texts({"a", "b", "a", "a", "c"}));
  REQUIRE(d.size() == 3);
  CHECK(d.comments[0].text == "a");
  CHECK(d.comments[1].text == "b");
  CHECK(d.comments[2].text == "c");
  CHECK(d.comments[2].id == 4);  // ids are stable

  const Dataset no_dupes = from_texts({"x", "y", "z"});
  CHECK(deduplicate(no_dupes).size() == 3);
  // Idempotent.
  CHECK(deduplicate(deduplicate(d)).size() == d.size());
}

TEST_CASE("deduplicate compares NFC-normalized bytes") {
  // Same text, composed vs decomposed umlaut.
  const Dataset d = deduplicate(from_texts({"schön", "schön", "schon"}));
  CHECK(d.size() == 2);
  // Case differences are preserved (raw comparison).
  CHECK(deduplicate(from_texts({"Wort", "wort"})).size() == 2);
}

TEST_CASE("preprocess_dataset reports truncation diagnostics") {
  std::string long_text;
  for (int i = 0; i < 30; ++i) long_text += "wort" + std::to_string(i) + " ";
  Dataset d = from_texts({"kurz", long_text, long_text + "extra"});
  PreprocessStats stats;
  const Dataset clean = preprocess_dataset(d, 10, &stats);
  CHECK(stats.truncation_affected == 2);
  for (const Comment& c : clean.comments) CHECK(text::count_tokens(c.text) <= 10);
}

TEST_CASE("make_fold_plan splits 3226 ids into the documented fold sizes") {
  std::vector<std::string> texts;
  for (int i = 0; i < 3226; ++i) texts.push_back("t" + std::to_string(i));
  const FoldPlan plan = make_fold_plan(from_texts(texts), 5, 0.1, 99);
  REQUIRE(plan.folds.size() == 5);
  std::multiset<std::size_t> sizes;
  for (const auto& f : plan.folds) sizes.insert(f.size());
  CHECK(sizes == std::multiset<std::size_t>{646, 645, 645, 645, 645});
  CHECK(plan.folds[0].size() == 646);  // remainder goes to the lowest-indexed fold
  validate_fold_plan(plan);
}

TEST_CASE("make_fold_plan draws early-stop subsets of the documented size") {
  std::vector<std::string> texts;
  for (int i = 0; i < 10; ++i) texts.push_back("t" + std::to_string(i));
  const FoldPlan plan = make_fold_plan(from_texts(texts), 5, 0.1, 7);
  for (std::size_t f = 0; f < 5; ++f) {
    CHECK(plan.folds[f].size() == 2);
    CHECK(plan.early_stop[f].size() == 1);  // round(0.1 * 8)
  }
  validate_fold_plan(plan);
}

TEST_CASE("make_fold_plan is deterministic and validates preconditions") {
  std::vector<std::string> texts;
  for (int i = 0; i < 57; ++i) texts.push_back("t" + std::to_string(i));
  const Dataset d = from_texts(texts);
  const FoldPlan a = make_fold_plan(d, 5, 0.1, 42);
  const FoldPlan b = make_fold_plan(d, 5, 0.1, 42);
  CHECK(a.folds == b.folds);
  CHECK(a.early_stop == b.early_stop);
  const FoldPlan c = make_fold_plan(d, 5, 0.1, 43);
  CHECK(a.folds != c.folds);

  CHECK_THROWS_AS(make_fold_plan(d, 1, 0.1, 0), ContractError);
  CHECK_THROWS_AS(make_fold_plan(d, 5, 1.5, 0), ContractError);
  CHECK_THROWS_AS(make_fold_plan(from_texts({"a", "b"}), 5, 0.1, 0), ConfigError);
}

TEST_CASE("fold plan partition invariants hold on fuzzed sizes") {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 10 + static_cast<int>(rng.next_below(500));
    const int k = 2 + static_cast<int>(rng.next_below(7));
    std::vector<std::string> texts;
    for (int i = 0; i < n; ++i) texts.push_back("t" + std::to_string(i));
    const FoldPlan plan = make_fold_plan(from_texts(texts), k, 0.1, rng.next_u64());
    validate_fold_plan(plan);
    std::size_t total = 0;
    std::size_t max_size = 0, min_size = static_cast<std::size_t>(n);
    for (const auto& f : plan.folds) {
      total += f.size();
      max_size = std::max(max_size, f.size());
      min_size = std::min(min_size, f.size());
    }
    CHECK(total == static_cast<std::size_t>(n));
    CHECK(max_size - min_size <= 1);
    for (int f = 0; f < k; ++f) {
      const auto pool = plan.training_pool(static_cast<std::size_t>(f));
      CHECK(plan.early_stop[f].size() == early_stop_size(0.1, pool.size()));
    }
  }
}

TEST_CASE("fold plan survives a file round-trip") {
  TempDir tmp;
  std::vector<std::string> texts;
  for (int i = 0; i < 37; ++i) texts.push_back("t" + std::to_string(i));
  const Dataset d = from_texts(texts);
  const FoldPlan plan = make_fold_plan(d, 5, 0.1, 3);
  const std::string path = (tmp.path / "folds.json").string();
  save_fold_plan(plan, path);
  const FoldPlan back = load_fold_plan(path);
  CHECK(back.seed == plan.seed);
  CHECK(back.k == plan.k);
  CHECK(back.fraction == plan.fraction);
  CHECK(back.folds == plan.folds);
  CHECK(back.early_stop == plan.early_stop);
  validate_fold_plan(back, &d);
}

TEST_CASE("draw_early_stop varies by stream but not by call") {
  std::vector<std::int64_t> pool;
  for (int i = 0; i < 80; ++i) pool.push_back(i);
  const auto a = draw_early_stop(pool, 0.1, 5);
  const auto b = draw_early_stop(pool, 0.1, 5);
  const auto c = draw_early_stop(pool, 0.1, 6);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a.size() == 8);
}
