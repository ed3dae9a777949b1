#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <vector>

#include "germeval/ensemble.hpp"
#include "germeval/metrics.hpp"
#include "germeval/prob_table.hpp"
#include "germeval/rng.hpp"

using namespace germeval;

namespace {

ProbabilityTable multi_table(const std::string& id, const std::vector<std::int64_t>& ids,
                             const std::vector<std::array<double, 3>>& probs) {
  ProbabilityTable t;
  t.model_id = id;
  t.head = HeadKind::kMultiLabel;
  t.sample_ids = ids;
  t.probs = probs;
  return t;
}

ProbabilityTable single_table(const std::string& id, Task task,
                              const std::vector<std::int64_t>& ids,
                              const std::vector<double>& p_pos) {
  ProbabilityTable t;
  t.model_id = id;
  t.head = HeadKind::kSingleLabel;
  t.task = task;
  t.sample_ids = ids;
  for (double p : p_pos) {
    std::array<double, 3> row = {std::nan(""), std::nan(""), std::nan("")};
    row[static_cast<std::size_t>(task)] = p;
    t.probs.push_back(row);
  }
  return t;
}

ProbabilityTable random_multi(const std::string& id, const std::vector<std::int64_t>& ids,
                              Rng& rng) {
  std::vector<std::array<double, 3>> probs;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    probs.push_back({rng.next_double(), rng.next_double(), rng.next_double()});
  }
  return multi_table(id, ids, probs);
}

GoldLookup gold_of(const std::vector<std::int64_t>& ids, const std::vector<LabelTriple>& labels) {
  GoldLookup gold;
  for (std::size_t i = 0; i < ids.size(); ++i) gold[ids[i]] = labels[i];
  return gold;
}

GoldLookup random_gold(const std::vector<std::int64_t>& ids, Rng& rng) {
  GoldLookup gold;
  for (std::int64_t id : ids) {
    gold[id] = {rng.next_below(2) == 1, rng.next_below(2) == 1, rng.next_below(2) == 1};
  }
  return gold;
}

/// Test-local F1 at one threshold, counted by loop.
double f1_at(const ProbabilityTable& t, const GoldLookup& gold, std::size_t cls, double threshold) {
  std::vector<bool> g, p;
  for (std::size_t i = 0; i < t.size(); ++i) {
    g.push_back(gold.at(t.sample_ids[i])[cls]);
    p.push_back(t.probs[i][cls] >= threshold);
  }
  return germeval_f1(confusion(g, p));
}

PoolMember make_member(std::size_t fold, std::size_t idx, const ProbabilityTable& val,
                       const ProbabilityTable& es) {
  PoolMember m;
  m.fold = fold;
  m.member = idx;
  m.head = val.head;
  m.model_ids = {val.model_id};
  m.val_tables = {val};
  m.es_tables = {es};
  m.es_ids = {es.sample_ids};
  return m;
}

}  // namespace

TEST_CASE("soft_vote of identical tables reproduces the member") {
  const std::vector<std::int64_t> ids = {1, 2, 3};
  Rng rng(51);
  const ProbabilityTable m = random_multi("m", ids, rng);
  const ProbabilityTable avg = soft_vote({&m, &m, &m});
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK_THAT(avg.probs[i][c], Catch::Matchers::WithinAbs(m.probs[i][c], 1e-15));
    }
  }
}

TEST_CASE("soft_vote averages probabilities") {
  const std::vector<std::int64_t> ids = {7};
  const ProbabilityTable a = multi_table("a", ids, {{0.2, 0.2, 0.2}});
  const ProbabilityTable b = multi_table("b", ids, {{0.8, 0.8, 0.8}});
  const ProbabilityTable avg = soft_vote({&a, &b});
  for (std::size_t c = 0; c < 3; ++c) CHECK(avg.probs[0][c] == 0.5);
}

TEST_CASE("soft_vote of 7 random tables matches a per-cell loop oracle") {
  std::vector<std::int64_t> ids;
  for (int i = 0; i < 20; ++i) ids.push_back(i);
  Rng rng(52);
  std::vector<ProbabilityTable> tables;
  for (int m = 0; m < 7; ++m) tables.push_back(random_multi("m" + std::to_string(m), ids, rng));
  std::vector<const ProbabilityTable*> ptrs;
  for (const auto& t : tables) ptrs.push_back(&t);
  const ProbabilityTable avg = soft_vote(ptrs);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      double sum = 0.0;
      for (const auto& t : tables) sum += t.probs[i][c];
      CHECK_THAT(avg.probs[i][c], Catch::Matchers::WithinAbs(sum / 7.0, 1e-15));
    }
  }
}

TEST_CASE("soft_vote is permutation invariant") {
  std::vector<std::int64_t> ids = {1, 2, 3, 4};
  Rng rng(53);
  const ProbabilityTable a = random_multi("a", ids, rng);
  const ProbabilityTable b = random_multi("b", ids, rng);
  const ProbabilityTable c = random_multi("c", ids, rng);
  const ProbabilityTable abc = soft_vote({&a, &b, &c});
  const ProbabilityTable cba = soft_vote({&c, &b, &a});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t cls = 0; cls < 3; ++cls) {
      CHECK_THAT(abc.probs[i][cls], Catch::Matchers::WithinAbs(cba.probs[i][cls], 1e-15));
    }
  }
}

TEST_CASE("soft_vote aligns rows by sample id and reports missing ids") {
  const ProbabilityTable a = multi_table("a", {1, 2}, {{0.1, 0.1, 0.1}, {0.9, 0.9, 0.9}});
  const ProbabilityTable b = multi_table("b", {2, 1}, {{0.9, 0.9, 0.9}, {0.1, 0.1, 0.1}});
  const ProbabilityTable avg = soft_vote({&a, &b});
  CHECK(avg.probs[0][0] == 0.1);
  CHECK(avg.probs[1][0] == 0.9);

  const ProbabilityTable c = multi_table("c", {1, 3}, {{0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}});
  CHECK_THROWS_WITH(soft_vote({&a, &c}), Catch::Matchers::ContainsSubstring("2"));
}

TEST_CASE("threshold grid covers both endpoints") {
  const std::vector<double> grid = threshold_grid(0.025);
  REQUIRE(grid.size() == 41);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 1.0);
}

TEST_CASE("select_thresholds picks the smallest maximizing grid point") {
  // Any threshold in (0.1, 0.4] is perfect; the smallest grid maximizer is 0.125.
  const std::vector<std::int64_t> ids = {1, 2, 3};
  const ProbabilityTable t =
      multi_table("m", ids, {{0.1, 0.1, 0.1}, {0.4, 0.4, 0.4}, {0.9, 0.9, 0.9}});
  const GoldLookup gold = gold_of(ids, {{0, 0, 0}, {1, 1, 1}, {1, 1, 1}});
  const Thresholds th = select_thresholds({&t}, gold);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK_THAT(th.t[c], Catch::Matchers::WithinAbs(0.125, 1e-12));
    CHECK(f1_at(t, gold, c, th.t[c]) == 1.0);
  }
}

TEST_CASE("perfectly separated probabilities calibrate to a perfect F1") {
  const std::vector<std::int64_t> ids = {1, 2, 3, 4};
  const ProbabilityTable t = multi_table(
      "m", ids, {{0.05, 0.8, 0.2}, {0.1, 0.9, 0.3}, {0.85, 0.1, 0.7}, {0.9, 0.2, 0.8}});
  const GoldLookup gold = gold_of(ids, {{0, 1, 0}, {0, 1, 0}, {1, 0, 1}, {1, 0, 1}});
  const Thresholds th = select_thresholds({&t}, gold);
  for (std::size_t c = 0; c < 3; ++c) CHECK(f1_at(t, gold, c, th.t[c]) == 1.0);
}

TEST_CASE("selected thresholds attain the grid maximum on 100 random instances") {
  Rng rng(55);
  const std::vector<double> grid = threshold_grid(0.025);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::int64_t> ids;
    const std::size_t n = 3 + rng.next_below(20);
    for (std::size_t i = 0; i < n; ++i) ids.push_back(static_cast<std::int64_t>(i));
    const ProbabilityTable t = random_multi("m", ids, rng);
    const GoldLookup gold = random_gold(ids, rng);
    const Thresholds th = select_thresholds({&t}, gold);
    for (std::size_t c = 0; c < 3; ++c) {
      double best = -1.0;
      double best_t = -1.0;
      for (double g : grid) {
        const double f1 = f1_at(t, gold, c, g);
        if (f1 > best) {
          best = f1;
          best_t = g;
        }
      }
      CHECK(f1_at(t, gold, c, th.t[c]) == best);
      CHECK(th.t[c] == best_t);  // smallest maximizer
    }
  }
}

TEST_CASE("macro criterion equals exhaustive triple enumeration") {
  // The member-averaged macro surface over all 41^3 threshold triples attains
  // its maximum at the factorized per-class scan's pick.
  Rng rng(56);
  std::vector<std::int64_t> ids;
  for (int i = 0; i < 12; ++i) ids.push_back(i);
  std::vector<ProbabilityTable> members;
  for (int m = 0; m < 3; ++m) members.push_back(random_multi("m" + std::to_string(m), ids, rng));
  const GoldLookup gold = random_gold(ids, rng);

  std::vector<const ProbabilityTable*> ptrs;
  for (const auto& m : members) ptrs.push_back(&m);
  ThresholdConfig cfg;
  cfg.criterion = ThresholdCriterion::kMacro;
  const Thresholds selected = select_thresholds(ptrs, gold, cfg);

  const std::vector<double> grid = threshold_grid(0.025);
  const auto member_mean_macro = [&](double t0, double t1, double t2) {
    double sum = 0.0;
    for (const auto& m : members) {
      sum += (f1_at(m, gold, 0, t0) + f1_at(m, gold, 1, t1) + f1_at(m, gold, 2, t2)) / 3.0;
    }
    return sum / static_cast<double>(members.size());
  };
  double best = -1.0;
  for (double t0 : grid) {
    for (double t1 : grid) {
      for (double t2 : grid) best = std::max(best, member_mean_macro(t0, t1, t2));
    }
  }
  CHECK_THAT(member_mean_macro(selected.t[0], selected.t[1], selected.t[2]),
             Catch::Matchers::WithinAbs(best, 1e-12));
}

TEST_CASE("predict_multilabel applies the p >= t rule") {
  const std::vector<std::int64_t> ids = {1};
  const ProbabilityTable avg = multi_table("e", ids, {{0.9, 0.1, 0.6}});
  Thresholds th;
  th.t = {0.5, 0.5, 0.5};
  CHECK(predict_multilabel(avg, th)[0] == LabelTriple{true, false, true});

  th.t = {0.0, 0.0, 0.0};
  CHECK(predict_multilabel(avg, th)[0] == LabelTriple{true, true, true});

  th.t = {0.9, 0.1, 0.6};  // boundary counts as assigned
  CHECK(predict_multilabel(avg, th)[0] == LabelTriple{true, true, true});
}

TEST_CASE("predict_singlelabel is the p >= 0.5 rule") {
  const std::vector<std::int64_t> ids = {1, 2, 3};
  const ProbabilityTable toxic = single_table("t", Task::kToxic, ids, {0.51, 0.5, 0.49});
  const ProbabilityTable engaging = single_table("e", Task::kEngaging, ids, {0.2, 0.2, 0.2});
  const ProbabilityTable fact = single_table("f", Task::kFact, ids, {0.8, 0.8, 0.8});
  const auto pred = predict_singlelabel({&toxic, &engaging, &fact});
  CHECK(pred[0] == LabelTriple{true, false, true});
  CHECK(pred[1] == LabelTriple{true, false, true});  // exact tie resolves positive
  CHECK(pred[2] == LabelTriple{false, false, true});

  CHECK_THROWS_AS(predict_singlelabel({&toxic, nullptr, &fact}), ConfigError);
  CHECK_THROWS_AS(predict_singlelabel({&toxic, &toxic, &fact}), ConfigError);
}

TEST_CASE("argmax of the averaged pair equals the half rule on random tables") {
  Rng rng(57);
  std::vector<std::int64_t> ids;
  for (int i = 0; i < 10; ++i) ids.push_back(i);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<ProbabilityTable> members;
    const std::size_t count = 1 + rng.next_below(5);
    for (std::size_t m = 0; m < count; ++m) {
      std::vector<double> p;
      for (std::size_t i = 0; i < ids.size(); ++i) p.push_back(rng.next_double());
      members.push_back(single_table("s", Task::kToxic, ids, p));
    }
    std::vector<const ProbabilityTable*> ptrs;
    for (const auto& m : members) ptrs.push_back(&m);
    const ProbabilityTable avg = soft_vote(ptrs);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const double p_pos = avg.probs[i][0];
      const double p_neg = 1.0 - p_pos;  // members are pair-normalized
      CHECK((p_pos >= p_neg) == (p_pos >= 0.5));
    }
  }
}

TEST_CASE("ensemble of one member equals that member's solo evaluation") {
  Rng rng(58);
  std::vector<std::int64_t> val_ids = {1, 2, 3, 4, 5};
  std::vector<std::int64_t> es_ids = {10, 11, 12};
  const ProbabilityTable val = random_multi("m0", val_ids, rng);
  const ProbabilityTable es = random_multi("m0", es_ids, rng);
  GoldLookup gold = random_gold(val_ids, rng);
  for (const auto& [id, labels] : random_gold(es_ids, rng)) gold[id] = labels;
  const PoolMember member = make_member(0, 0, val, es);

  const EnsembleFoldResult solo = evaluate_ensemble_members({&member}, gold);

  // Solo path computed explicitly: calibrate on es, threshold val.
  const Thresholds th = select_thresholds({&es}, gold);
  const auto pred = predict_multilabel(val, th);
  std::vector<LabelTriple> gold_labels;
  for (std::int64_t id : val_ids) gold_labels.push_back(gold.at(id));
  const EvalReport expected = evaluate(gold_labels, pred);

  CHECK(solo.report.macro == expected.macro);
  CHECK(solo.report.f1 == expected.f1);
  CHECK(solo.thresholds.t == th.t);
}

TEST_CASE("duplicated members change nothing") {
  Rng rng(59);
  std::vector<std::int64_t> val_ids = {1, 2, 3, 4, 5, 6};
  std::vector<std::int64_t> es_ids = {20, 21, 22, 23};
  GoldLookup gold = random_gold(val_ids, rng);
  for (const auto& [id, labels] : random_gold(es_ids, rng)) gold[id] = labels;
  const PoolMember m = make_member(0, 0, random_multi("m", val_ids, rng),
                                   random_multi("m", es_ids, rng));
  const EnsembleFoldResult once = evaluate_ensemble_members({&m}, gold);
  const EnsembleFoldResult twice = evaluate_ensemble_members({&m, &m}, gold);
  CHECK(once.report.macro == twice.report.macro);
  CHECK(once.report.f1 == twice.report.f1);
  CHECK(once.thresholds.t == twice.thresholds.t);
}

TEST_CASE("three-member pool on 12 samples matches the hand computation") {
  std::vector<std::int64_t> val_ids, es_ids;
  for (int i = 0; i < 12; ++i) val_ids.push_back(i);
  for (int i = 100; i < 106; ++i) es_ids.push_back(i);

  Rng rng(60);
  std::vector<PoolMember> members;
  for (int m = 0; m < 3; ++m) {
    members.push_back(make_member(0, static_cast<std::size_t>(m),
                                  random_multi("m" + std::to_string(m), val_ids, rng),
                                  random_multi("m" + std::to_string(m), es_ids, rng)));
  }
  GoldLookup gold = random_gold(val_ids, rng);
  for (const auto& [id, labels] : random_gold(es_ids, rng)) gold[id] = labels;

  const EnsembleFoldResult got =
      evaluate_ensemble_members({&members[0], &members[1], &members[2]}, gold);

  // Hand computation, grid point by grid point and sample by sample.
  const std::vector<double> grid = threshold_grid(0.025);
  Thresholds hand_th;
  for (std::size_t c = 0; c < 3; ++c) {
    double best = -1.0;
    double best_t = 0.0;
    for (double t : grid) {
      double mean = 0.0;
      for (const PoolMember& m : members) mean += f1_at(m.es_tables[0], gold, c, t);
      mean /= 3.0;
      if (mean > best) {
        best = mean;
        best_t = t;
      }
    }
    hand_th.t[c] = best_t;
  }
  CHECK(got.thresholds.t == hand_th.t);

  std::vector<LabelTriple> hand_pred;
  std::vector<LabelTriple> hand_gold;
  for (std::size_t i = 0; i < val_ids.size(); ++i) {
    LabelTriple pred{};
    for (std::size_t c = 0; c < 3; ++c) {
      double mean = 0.0;
      for (const PoolMember& m : members) mean += m.val_tables[0].probs[i][c];
      pred[c] = mean / 3.0 >= hand_th.t[c];
    }
    hand_pred.push_back(pred);
    hand_gold.push_back(gold.at(val_ids[i]));
  }
  const EvalReport expected = evaluate(hand_gold, hand_pred);
  CHECK(got.report.macro == expected.macro);
  CHECK(got.report.f1 == expected.f1);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(got.report.confusions[c].tp == expected.confusions[c].tp);
    CHECK(got.report.confusions[c].tn == expected.confusions[c].tn);
  }
}

TEST_CASE("averaged-probabilities aggregation calibrates on the shared voted table") {
  Rng rng(61);
  std::vector<std::int64_t> ids = {1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<ProbabilityTable> members;
  for (int m = 0; m < 3; ++m) members.push_back(random_multi("m" + std::to_string(m), ids, rng));
  std::vector<const ProbabilityTable*> ptrs;
  for (const auto& m : members) ptrs.push_back(&m);
  const GoldLookup gold = random_gold(ids, rng);
  ThresholdConfig cfg;
  cfg.aggregation = ThresholdAggregation::kAveragedProbabilities;
  const Thresholds th = select_thresholds(ptrs, gold, cfg);

  const ProbabilityTable avg = soft_vote(ptrs);
  const std::vector<double> grid = threshold_grid(0.025);
  for (std::size_t c = 0; c < 3; ++c) {
    double best = -1.0;
    double best_t = 0.0;
    for (double t : grid) {
      const double f1 = f1_at(avg, gold, c, t);
      if (f1 > best) {
        best = f1;
        best_t = t;
      }
    }
    CHECK(th.t[c] == best_t);
  }
}
