#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "germeval/csv.hpp"
#include "germeval/dataset.hpp"
#include "germeval/errors.hpp"
#include "germeval/rng.hpp"

namespace germeval {

/// Deterministic k-fold partition of a dataset by sample id, with one
/// canonical early-stopping subset per fold. Per-model training draws its own
/// early-stopping subset of the same size from the fold's training pool.
struct FoldPlan {
  std::uint64_t seed = 0;
  int k = 0;
  double fraction = 0.1;
  std::vector<std::vector<std::int64_t>> folds;       // validation ids per fold
  std::vector<std::vector<std::int64_t>> early_stop;  // canonical per-fold subset

  /// All ids outside fold i, ascending. This is the pool that both training
  /// and early-stopping samples come from.
  std::vector<std::int64_t> training_pool(std::size_t fold) const {
    std::unordered_set<std::int64_t> held(folds.at(fold).begin(), folds.at(fold).end());
    std::vector<std::int64_t> pool;
    for (const auto& f : folds) {
      for (std::int64_t id : f) {
        if (!held.count(id)) pool.push_back(id);
      }
    }
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  std::size_t total_samples() const {
    std::size_t n = 0;
    for (const auto& f : folds) n += f.size();
    return n;
  }
};

/// round-half-up of fraction * pool size.
inline std::size_t early_stop_size(double fraction, std::size_t pool_size) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(pool_size) + 0.5));
}

/// Draws an early-stopping subset from a fold's training pool. Model training
/// calls this with a per-model stream so ensemble members differ in their
/// early-stopping samples.
inline std::vector<std::int64_t> draw_early_stop(const std::vector<std::int64_t>& pool,
                                                 double fraction, std::uint64_t stream_seed) {
  std::vector<std::int64_t> shuffled = pool;
  Rng rng(stream_seed);
  rng.shuffle(shuffled);
  shuffled.resize(early_stop_size(fraction, pool.size()));
  return shuffled;
}

inline FoldPlan make_fold_plan(const Dataset& d, int k, double fraction, std::uint64_t seed) {
  if (k < 2) throw ContractError("make_fold_plan: k must be >= 2");
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ContractError("make_fold_plan: fraction must be in (0, 1)");
  }
  if (d.size() < static_cast<std::size_t>(k)) {
    throw ConfigError("make_fold_plan: dataset of " + std::to_string(d.size()) +
                      " samples cannot be split into " + std::to_string(k) + " folds");
  }

  std::vector<std::int64_t> ids;
  ids.reserve(d.size());
  for (const Comment& c : d.comments) ids.push_back(c.id);
  Rng shuffle_rng(mix_seed(seed, 1));
  shuffle_rng.shuffle(ids);

  FoldPlan plan;
  plan.seed = seed;
  plan.k = k;
  plan.fraction = fraction;
  const std::size_t n = ids.size();
  const std::size_t base = n / static_cast<std::size_t>(k);
  const std::size_t extra = n % static_cast<std::size_t>(k);  // lowest-indexed folds get one more
  std::size_t pos = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t len = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
    plan.folds.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(pos),
                            ids.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  for (int f = 0; f < k; ++f) {
    plan.early_stop.push_back(draw_early_stop(plan.training_pool(static_cast<std::size_t>(f)),
                                              fraction,
                                              mix_seed(seed, 2, static_cast<std::uint64_t>(f))));
  }
  return plan;
}

/// Checks the partition invariants; with a dataset, also that the plan covers
/// exactly its ids.
inline void validate_fold_plan(const FoldPlan& plan, const Dataset* d = nullptr) {
  std::unordered_set<std::int64_t> all;
  for (const auto& fold : plan.folds) {
    for (std::int64_t id : fold) {
      if (!all.insert(id).second) {
        throw ConfigError("fold plan: id " + std::to_string(id) + " appears in two folds");
      }
    }
  }
  if (plan.folds.size() != static_cast<std::size_t>(plan.k)) {
    throw ConfigError("fold plan: expected " + std::to_string(plan.k) + " folds");
  }
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    std::unordered_set<std::int64_t> held(plan.folds[f].begin(), plan.folds[f].end());
    for (std::int64_t id : plan.early_stop.at(f)) {
      if (held.count(id)) {
        throw ConfigError("fold plan: early-stop id " + std::to_string(id) +
                          " overlaps validation fold " + std::to_string(f));
      }
      if (!all.count(id)) {
        throw ConfigError("fold plan: early-stop id " + std::to_string(id) + " is unknown");
      }
    }
  }
  if (d) {
    if (all.size() != d->size()) {
      throw ConfigError("fold plan covers " + std::to_string(all.size()) + " ids but dataset has " +
                        std::to_string(d->size()));
    }
    for (const Comment& c : d->comments) {
      if (!all.count(c.id)) {
        throw ConfigError("fold plan: dataset id " + std::to_string(c.id) + " missing from plan");
      }
    }
  }
}

inline nlohmann::json fold_plan_to_json(const FoldPlan& plan) {
  return nlohmann::json{{"seed", plan.seed},
                        {"k", plan.k},
                        {"fraction", plan.fraction},
                        {"folds", plan.folds},
                        {"early_stop", plan.early_stop}};
}

inline FoldPlan fold_plan_from_json(const nlohmann::json& j) {
  FoldPlan plan;
  plan.seed = j.at("seed").get<std::uint64_t>();
  plan.k = j.at("k").get<int>();
  plan.fraction = j.at("fraction").get<double>();
  plan.folds = j.at("folds").get<std::vector<std::vector<std::int64_t>>>();
  plan.early_stop = j.at("early_stop").get<std::vector<std::vector<std::int64_t>>>();
  validate_fold_plan(plan);
  return plan;
}

inline void save_fold_plan(const FoldPlan& plan, const std::string& path) {
  csv::write_file(path, fold_plan_to_json(plan).dump(2) + "\n");
}

inline FoldPlan load_fold_plan(const std::string& path) {
  return fold_plan_from_json(nlohmann::json::parse(csv::read_file(path)));
}

}  // namespace germeval
