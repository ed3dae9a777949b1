#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "germeval/bootstrap.hpp"
#include "germeval/ensemble.hpp"
#include "germeval/rng.hpp"

using namespace germeval;

namespace {

ProbabilityTable random_multi(const std::string& id, const std::vector<std::int64_t>& ids,
                              Rng& rng) {
  ProbabilityTable t;
  t.model_id = id;
  t.head = HeadKind::kMultiLabel;
  t.sample_ids = ids;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    t.probs.push_back({rng.next_double(), rng.next_double(), rng.next_double()});
  }
  return t;
}

ProbabilityTable constant_multi(const std::string& id, const std::vector<std::int64_t>& ids,
                                double p) {
  ProbabilityTable t;
  t.model_id = id;
  t.head = HeadKind::kMultiLabel;
  t.sample_ids = ids;
  t.probs.assign(ids.size(), {p, p, p});
  return t;
}

struct ToyPool {
  TrainedPool pool;
  GoldLookup gold;
};

/// k folds of `fold_size` validation samples, `count` members per fold with
/// random probability tables.
ToyPool make_toy_pool(std::size_t k, std::size_t count, std::size_t fold_size, std::uint64_t seed,
                      const std::vector<std::string>& groups = {}) {
  Rng rng(seed);
  ToyPool toy;
  toy.pool.k = k;
  toy.pool.head = HeadKind::kMultiLabel;
  std::int64_t next_id = 0;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::int64_t> val_ids, es_ids;
    for (std::size_t i = 0; i < fold_size; ++i) val_ids.push_back(next_id++);
    for (std::size_t i = 0; i < fold_size / 2 + 2; ++i) es_ids.push_back(next_id++);
    for (std::int64_t id : val_ids) {
      toy.gold[id] = {rng.next_below(2) == 1, rng.next_below(2) == 1, rng.next_below(2) == 1};
    }
    for (std::int64_t id : es_ids) {
      toy.gold[id] = {rng.next_below(2) == 1, rng.next_below(2) == 1, rng.next_below(2) == 1};
    }
    for (std::size_t m = 0; m < count; ++m) {
      PoolMember member;
      member.fold = f;
      member.member = m;
      member.group = groups.empty() ? "default" : groups[m % groups.size()];
      member.head = HeadKind::kMultiLabel;
      const std::string id = "f" + std::to_string(f) + "_m" + std::to_string(m);
      member.model_ids = {id};
      member.val_tables = {random_multi(id, val_ids, rng)};
      member.es_tables = {random_multi(id, es_ids, rng)};
      member.es_ids = {es_ids};
      toy.pool.members.push_back(std::move(member));
    }
  }
  return toy;
}

}  // namespace

TEST_CASE("summarize moments on tiny hand cases") {
  BootstrapSizeSummary s;
  s.samples = {0.7, 0.7, 0.7};
  compute_moments(s);
  CHECK_THAT(s.mean, Catch::Matchers::WithinAbs(0.7, 1e-15));
  CHECK(s.std_dev == 0.0);

  s.samples = {0.6, 0.8};
  compute_moments(s);
  CHECK_THAT(s.mean, Catch::Matchers::WithinAbs(0.7, 1e-15));
  CHECK_THAT(s.std_dev, Catch::Matchers::WithinAbs(0.1, 1e-15));  // population std
}

TEST_CASE("summarize matches a loop oracle on random samples") {
  Rng rng(71);
  BootstrapSizeSummary s;
  for (int i = 0; i < 400; ++i) s.samples.push_back(rng.next_double());
  compute_moments(s);
  double mean = 0.0;
  for (double v : s.samples) mean += v;
  mean /= static_cast<double>(s.samples.size());
  double var = 0.0;
  for (double v : s.samples) var += (v - mean) * (v - mean);
  var /= static_cast<double>(s.samples.size());
  CHECK_THAT(s.mean, Catch::Matchers::WithinAbs(mean, 1e-15));
  CHECK_THAT(s.std_dev, Catch::Matchers::WithinAbs(std::sqrt(var), 1e-15));
}

TEST_CASE("single-model pool degenerates to zero spread") {
  const ToyPool toy = make_toy_pool(2, 1, 10, 81);
  BootstrapConfig cfg;
  cfg.sizes = {1, 2, 5};
  cfg.samples_per_size = 50;
  cfg.seed = 3;
  cfg.threads = 1;
  const BootstrapSummary summary = run_bootstrap(toy.pool, toy.gold, cfg);
  REQUIRE(summary.per_size.size() == 3);

  // Every draw picks the same member, so every size yields the same value and
  // it equals the generic evaluation path's score.
  EnsembleSpec spec;
  spec.member_indices = {0};
  const double expected = ensemble_fold_mean_macro(toy.pool, spec, toy.gold);
  for (const auto& s : summary.per_size) {
    CHECK(s.std_dev == 0.0);
    for (double v : s.samples) CHECK(v == expected);
  }
}

TEST_CASE("size-1 draws resample individual member scores") {
  const ToyPool toy = make_toy_pool(2, 4, 12, 82);
  std::set<double> member_scores;
  for (std::size_t m = 0; m < 4; ++m) {
    EnsembleSpec spec;
    spec.member_indices = {m};
    member_scores.insert(ensemble_fold_mean_macro(toy.pool, spec, toy.gold));
  }
  BootstrapConfig cfg;
  cfg.sizes = {1};
  cfg.samples_per_size = 200;
  cfg.seed = 4;
  const BootstrapSummary summary = run_bootstrap(toy.pool, toy.gold, cfg);
  for (double v : summary.per_size[0].samples) CHECK(member_scores.count(v) == 1);
  // With 200 draws over 4 members, every member should appear.
  const std::set<double> seen(summary.per_size[0].samples.begin(),
                              summary.per_size[0].samples.end());
  CHECK(seen == member_scores);
}

TEST_CASE("three-model pool at size two stays within three standard errors of the exact mean") {
  const ToyPool toy = make_toy_pool(2, 3, 16, 83);

  // Exact first and second moments over ordered pairs (i, j), scored through
  // the generic ensemble path. Multiset {i,j} has probability 1/9 for i == j
  // and 2/9 otherwise; iterating ordered pairs weights them correctly.
  double exact_mean = 0.0, exact_sq = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      EnsembleSpec spec;
      spec.member_indices = {i, j};
      const double score = ensemble_fold_mean_macro(toy.pool, spec, toy.gold);
      exact_mean += score / 9.0;
      exact_sq += score * score / 9.0;
    }
  }
  const double exact_var = exact_sq - exact_mean * exact_mean;

  BootstrapConfig cfg;
  cfg.sizes = {2};
  cfg.samples_per_size = 1000;
  cfg.seed = 5;
  const BootstrapSummary summary = run_bootstrap(toy.pool, toy.gold, cfg);
  const double se = std::sqrt(exact_var / 1000.0);
  CHECK(std::abs(summary.per_size[0].mean - exact_mean) <= 3.0 * se + 1e-12);
}

TEST_CASE("bootstrap is bit-identical at any thread count") {
  const ToyPool toy = make_toy_pool(3, 5, 10, 84);
  BootstrapConfig cfg;
  cfg.sizes = {1, 3, 7};
  cfg.samples_per_size = 40;
  cfg.seed = 6;
  cfg.threads = 1;
  const BootstrapSummary serial = run_bootstrap(toy.pool, toy.gold, cfg);
  cfg.threads = 8;
  const BootstrapSummary parallel = run_bootstrap(toy.pool, toy.gold, cfg);
  REQUIRE(serial.per_size.size() == parallel.per_size.size());
  for (std::size_t i = 0; i < serial.per_size.size(); ++i) {
    CHECK(serial.per_size[i].samples == parallel.per_size[i].samples);
  }
}

TEST_CASE("composition filters restrict sampling to the configured groups") {
  // Group "a" members always predict 0.9, group "b" members 0.1; gold is all
  // positive, so the macro score of a pure-"a" ensemble is 1 and mixing in any
  // "b" member changes it. Calibration is fixed at 0.5 to keep scores exact.
  TrainedPool pool;
  pool.k = 1;
  pool.head = HeadKind::kMultiLabel;
  GoldLookup gold;
  std::vector<std::int64_t> val_ids = {0, 1, 2, 3};
  std::vector<std::int64_t> es_ids = {10, 11};
  for (std::int64_t id : val_ids) gold[id] = {true, true, true};
  for (std::int64_t id : es_ids) gold[id] = {true, true, true};
  for (std::size_t m = 0; m < 6; ++m) {
    PoolMember member;
    member.fold = 0;
    member.member = m;
    member.group = m < 3 ? "a" : "b";
    member.head = HeadKind::kMultiLabel;
    const double p = m < 3 ? 0.9 : 0.1;
    member.model_ids = {"m" + std::to_string(m)};
    member.val_tables = {constant_multi("m" + std::to_string(m), val_ids, p)};
    member.es_tables = {constant_multi("m" + std::to_string(m), es_ids, p)};
    member.es_ids = {es_ids};
    pool.members.push_back(std::move(member));
  }

  BootstrapConfig cfg;
  cfg.sizes = {1, 2, 4};
  cfg.samples_per_size = 30;
  cfg.seed = 7;
  cfg.threshold_mode = BootstrapThresholdMode::kFixedHalf;
  cfg.composition = {{"a", 1.0}};
  const BootstrapSummary only_a = run_bootstrap(pool, gold, cfg);
  for (const auto& s : only_a.per_size) {
    for (double v : s.samples) CHECK(v == 1.0);  // only group-a members drawn
  }

  // 50/50 mix at even sizes averages 0.9s and 0.1s to exactly 0.5 < 0.5 is
  // false (>= rule), so predictions stay positive at size 2 with one of each.
  cfg.composition = {{"a", 1.0}, {"b", 1.0}};
  cfg.sizes = {2};
  const BootstrapSummary mixed = run_bootstrap(pool, gold, cfg);
  for (double v : mixed.per_size[0].samples) CHECK(v == 1.0);  // 0.5 >= 0.5 assigns

  cfg.composition = {{"b", 1.0}};
  const BootstrapSummary only_b = run_bootstrap(pool, gold, cfg);
  for (double v : only_b.per_size[0].samples) CHECK(v == 0.0);

  cfg.composition = {{"missing", 1.0}};
  CHECK_THROWS_AS(run_bootstrap(pool, gold, cfg), ConfigError);
}

TEST_CASE("spread shrinks with ensemble size across seeds") {
  for (std::uint64_t seed : {101ull, 202ull, 303ull}) {
    const ToyPool toy = make_toy_pool(2, 8, 20, seed);
    BootstrapConfig cfg;
    cfg.sizes = {2, 30};
    cfg.samples_per_size = 400;
    cfg.seed = seed;
    const BootstrapSummary summary = run_bootstrap(toy.pool, toy.gold, cfg);
    REQUIRE(summary.per_size[0].size == 2);
    REQUIRE(summary.per_size[1].size == 30);
    CHECK(summary.per_size[1].std_dev < summary.per_size[0].std_dev);
  }
}

TEST_CASE("reported means lie within their sample range") {
  const ToyPool toy = make_toy_pool(2, 5, 10, 85);
  BootstrapConfig cfg;
  cfg.sizes = {1, 2, 3};
  cfg.samples_per_size = 60;
  cfg.seed = 8;
  const BootstrapSummary summary = run_bootstrap(toy.pool, toy.gold, cfg);
  for (const auto& s : summary.per_size) {
    const double lo = *std::min_element(s.samples.begin(), s.samples.end());
    const double hi = *std::max_element(s.samples.begin(), s.samples.end());
    CHECK(s.mean >= lo);
    CHECK(s.mean <= hi);
  }
}

TEST_CASE("summary csv has the documented columns") {
  const ToyPool toy = make_toy_pool(2, 2, 6, 86);
  BootstrapConfig cfg;
  cfg.sizes = {1, 2};
  cfg.samples_per_size = 5;
  const BootstrapSummary summary = run_bootstrap(toy.pool, toy.gold, cfg);
  const std::string csv_text = summary_to_csv(summary);
  CHECK(csv_text.find("size,mean_macro_f1,std_macro_f1,n_samples\n") == 0);
  CHECK(std::count(csv_text.begin(), csv_text.end(), '\n') == 3);
  const std::string dump = samples_to_csv(summary);
  CHECK(dump.find("size,draw,macro_f1\n") == 0);
  CHECK(std::count(dump.begin(), dump.end(), '\n') == 11);
}

TEST_CASE("default size ladder is dense then sparse") {
  const std::vector<std::size_t> sizes = default_bootstrap_sizes();
  CHECK(sizes.front() == 1);
  CHECK(sizes.back() == 200);
  CHECK(std::count(sizes.begin(), sizes.end(), 15) == 1);
  CHECK(std::count(sizes.begin(), sizes.end(), 55) == 0);
  CHECK(sizes.size() == 50 + 15);
}
