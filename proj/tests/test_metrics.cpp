#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "germeval/metrics.hpp"
#include "germeval/rng.hpp"

using namespace germeval;

namespace {

/// From-definitions oracle, written against the score description and kept
/// independent of the library implementation: per-class precision and recall,
/// averaged over positive and negative class, harmonic mean of the averages.
/// Mistake-free predictions score 1 even when a class is absent.
double oracle_germeval_f1(double tp, double fp, double fn, double tn) {
  if (fp == 0.0 && fn == 0.0) return tp + tn > 0.0 ? 1.0 : 0.0;
  auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
  const double precision_pos = ratio(tp, tp + fp);
  const double precision_neg = ratio(tn, tn + fn);
  const double recall_pos = ratio(tp, tp + fn);
  const double recall_neg = ratio(tn, tn + fp);
  const double p = (precision_pos + precision_neg) / 2.0;
  const double r = (recall_pos + recall_neg) / 2.0;
  if (p + r <= 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

ConfusionMatrix cm(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn, std::uint64_t tn) {
  return ConfusionMatrix{tp, fp, fn, tn};
}

}  // namespace

TEST_CASE("confusion counts the 2x2 contingency") {
  const ConfusionMatrix m = confusion({true, true, false, false}, {true, false, true, false});
  CHECK(m.tp == 1);
  CHECK(m.fn == 1);
  CHECK(m.fp == 1);
  CHECK(m.tn == 1);

  const ConfusionMatrix perfect = confusion({true, false, true}, {true, false, true});
  CHECK(perfect.fp == 0);
  CHECK(perfect.fn == 0);

  CHECK_THROWS_AS(confusion({true}, {true, false}), ContractError);
  CHECK_THROWS_AS(confusion({}, {}), ContractError);
}

TEST_CASE("confusion agrees with a count-by-loop oracle on random pairs") {
  Rng rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.next_below(50);
    std::vector<bool> gold(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      gold[i] = rng.next_below(2) == 1;
      pred[i] = rng.next_below(2) == 1;
    }
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      tp += gold[i] && pred[i];
      fp += !gold[i] && pred[i];
      fn += gold[i] && !pred[i];
      tn += !gold[i] && !pred[i];
    }
    const ConfusionMatrix m = confusion(gold, pred);
    CHECK(m.tp == tp);
    CHECK(m.fp == fp);
    CHECK(m.fn == fn);
    CHECK(m.tn == tn);
    CHECK(m.total() == n);
  }
}

TEST_CASE("germeval_f1 on hand-checked matrices") {
  CHECK(germeval_f1(cm(3, 0, 0, 5)) == 1.0);          // perfect
  CHECK(germeval_f1(cm(0, 4, 3, 0)) == 0.0);          // everything wrong
  // P_pos = R_pos = 2/3, P_neg = R_neg = 6/7, averages 16/21, harmonic mean of
  // equal values is the value itself.
  CHECK_THAT(germeval_f1(cm(2, 1, 1, 6)),
             Catch::Matchers::WithinAbs(16.0 / 21.0, 1e-15));
}

TEST_CASE("germeval_f1 handles degenerate counts") {
  CHECK(germeval_f1(cm(0, 0, 0, 0)) == 0.0);
  // All-positive gold predicted perfectly: error-free scores 1 even though
  // the negative class is absent.
  CHECK(germeval_f1(cm(5, 0, 0, 0)) == 1.0);
  // One class absent and mistakes present: zero-denominator terms contribute 0.
  const double f1 = germeval_f1(cm(4, 1, 0, 0));
  CHECK_THAT(f1, Catch::Matchers::WithinAbs(oracle_germeval_f1(4, 1, 0, 0), 1e-15));
  CHECK(f1 > 0.0);
  CHECK(f1 < 1.0);
}

TEST_CASE("germeval_f1 matches the brute-force oracle on 1000 random matrices") {
  Rng rng(32);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto tp = rng.next_below(40);
    const auto fp = rng.next_below(40);
    const auto fn = rng.next_below(40);
    const auto tn = rng.next_below(40);
    if (tp + fp + fn + tn == 0) continue;
    const double expected = oracle_germeval_f1(static_cast<double>(tp), static_cast<double>(fp),
                                               static_cast<double>(fn), static_cast<double>(tn));
    CHECK_THAT(germeval_f1(cm(tp, fp, fn, tn)), Catch::Matchers::WithinAbs(expected, 1e-12));
  }
}

TEST_CASE("germeval_f1 is exactly label-swap invariant") {
  Rng rng(33);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto tp = rng.next_below(30);
    const auto fp = rng.next_below(30);
    const auto fn = rng.next_below(30);
    const auto tn = rng.next_below(30);
    if (tp + fp + fn + tn == 0) continue;
    // Exchanging positive and negative swaps tp<->tn and fp<->fn.
    CHECK(germeval_f1(cm(tp, fp, fn, tn)) == germeval_f1(cm(tn, fn, fp, tp)));
  }
}

TEST_CASE("scores stay in [0,1]") {
  Rng rng(34);
  for (int trial = 0; trial < 500; ++trial) {
    const double f1 = germeval_f1(
        cm(rng.next_below(20), rng.next_below(20), rng.next_below(20), rng.next_below(20)));
    CHECK(f1 >= 0.0);
    CHECK(f1 <= 1.0);
  }
}

TEST_CASE("macro_f1 reproduces the reported submission scores") {
  CHECK(macro_f1({1.0, 1.0, 1.0}) == 1.0);
  // Submitted multi-label ensemble row.
  CHECK(format_score(macro_f1({0.716, 0.699, 0.763})) == "0.726");
  // Corrected single-label row: 0.727333... displays as 0.727.
  CHECK(format_score(macro_f1({0.717, 0.697, 0.768})) == "0.727");
  CHECK_THAT(macro_f1({0.717, 0.697, 0.768}),
             Catch::Matchers::WithinAbs(0.7273333333333334, 1e-15));
}

TEST_CASE("macro_f1 is permutation-invariant") {
  const std::array<double, 3> values = {0.2, 0.5, 0.9};
  const double base = macro_f1(values);
  CHECK(macro_f1({0.5, 0.2, 0.9}) == base);
  CHECK(macro_f1({0.9, 0.5, 0.2}) == base);
}

TEST_CASE("evaluate composes per-class scores") {
  const std::vector<LabelTriple> gold = {{1, 0, 1}, {0, 1, 0}, {1, 1, 1}, {0, 0, 0}};

  SECTION("gold equals pred") {
    const EvalReport r = evaluate(gold, gold);
    CHECK(r.macro == 1.0);
    for (double f1 : r.f1) CHECK(f1 == 1.0);
  }

  SECTION("single sample") {
    const EvalReport r = evaluate({{1, 0, 1}}, {{1, 0, 1}});
    CHECK(r.macro == 1.0);
  }

  SECTION("inverted predictions on a balanced set agree with the oracle") {
    std::vector<LabelTriple> pred;
    for (const LabelTriple& g : gold) pred.push_back({!g[0], !g[1], !g[2]});
    const EvalReport r = evaluate(gold, pred);
    for (std::size_t c = 0; c < kNumTasks; ++c) {
      double tp = 0, fp = 0, fn = 0, tn = 0;
      for (std::size_t i = 0; i < gold.size(); ++i) {
        tp += gold[i][c] && pred[i][c];
        fp += !gold[i][c] && pred[i][c];
        fn += gold[i][c] && !pred[i][c];
        tn += !gold[i][c] && !pred[i][c];
      }
      CHECK_THAT(r.f1[c], Catch::Matchers::WithinAbs(oracle_germeval_f1(tp, fp, fn, tn), 1e-12));
    }
    CHECK_THAT(r.macro, Catch::Matchers::WithinAbs((r.f1[0] + r.f1[1] + r.f1[2]) / 3.0, 1e-15));
  }

  SECTION("length mismatch is a contract error") {
    CHECK_THROWS_AS(evaluate(gold, {{1, 0, 1}}), ContractError);
  }
}

TEST_CASE("evaluate agrees with brute force on random label sets") {
  Rng rng(35);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.next_below(30);
    std::vector<LabelTriple> gold(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < kNumTasks; ++c) {
        gold[i][c] = rng.next_below(2) == 1;
        pred[i][c] = rng.next_below(2) == 1;
      }
    }
    const EvalReport r = evaluate(gold, pred);
    double macro_sum = 0.0;
    for (std::size_t c = 0; c < kNumTasks; ++c) {
      double tp = 0, fp = 0, fn = 0, tn = 0;
      for (std::size_t i = 0; i < n; ++i) {
        tp += gold[i][c] && pred[i][c];
        fp += !gold[i][c] && pred[i][c];
        fn += gold[i][c] && !pred[i][c];
        tn += !gold[i][c] && !pred[i][c];
      }
      const double expected = oracle_germeval_f1(tp, fp, fn, tn);
      CHECK_THAT(r.f1[c], Catch::Matchers::WithinAbs(expected, 1e-12));
      macro_sum += expected;
    }
    CHECK_THAT(r.macro, Catch::Matchers::WithinAbs(macro_sum / 3.0, 1e-12));
  }
}

TEST_CASE("report serialization carries the table column order") {
  const EvalReport r = evaluate({{1, 0, 1}, {0, 1, 0}}, {{1, 0, 0}, {0, 1, 0}});
  const std::string csv_row = eval_report_csv(r);
  CHECK(csv_row.find("macro_f1,f1_toxic,f1_engaging,f1_fact\n") == 0);
  const nlohmann::json j = eval_report_to_json(r);
  CHECK(j.at("macro_f1").get<double>() == r.macro);
  CHECK(j.at("per_class").at("fact").at("fn").get<int>() == 1);
}
