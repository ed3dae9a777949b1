#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "germeval/ensemble.hpp"
#include "germeval/errors.hpp"
#include "germeval/metrics.hpp"
#include "germeval/rng.hpp"
#include "germeval/train.hpp"

namespace germeval {

enum class BootstrapThresholdMode : std::uint8_t {
  kCalibratedPerDraw = 0,  // each draw recalibrates thresholds per fold
  kFixedHalf = 1,          // 0.5 everywhere, cheaper
};

struct BootstrapConfig {
  std::vector<std::size_t> sizes;   // empty = default ladder
  std::size_t samples_per_size = 1000;
  std::uint64_t seed = 0;
  // Group name -> sampling weight. Empty = uniform over the whole pool.
  std::vector<std::pair<std::string, double>> composition;
  BootstrapThresholdMode threshold_mode = BootstrapThresholdMode::kCalibratedPerDraw;
  ThresholdConfig threshold;
  std::size_t threads = 0;  // 0 = hardware concurrency
};

/// Dense in the steep region, sparse after.
inline std::vector<std::size_t> default_bootstrap_sizes() {
  std::vector<std::size_t> sizes;
  for (std::size_t s = 1; s <= 50; ++s) sizes.push_back(s);
  for (std::size_t s = 60; s <= 200; s += 10) sizes.push_back(s);
  return sizes;
}

struct BootstrapSizeSummary {
  std::size_t size = 0;
  std::vector<double> samples;  // fold-averaged macro-F1 per draw
  double mean = 0.0;
  double std_dev = 0.0;  // population (divide by N)
};

struct BootstrapSummary {
  std::vector<BootstrapSizeSummary> per_size;
  std::uint64_t seed = 0;
  std::string composition = "all";
  std::size_t pool_size = 0;  // members per fold
};

inline void compute_moments(BootstrapSizeSummary& s) {
  const double n = static_cast<double>(s.samples.size());
  double mean = 0.0;
  bool all_equal = true;
  for (double v : s.samples) {
    mean += v;
    all_equal = all_equal && v == s.samples.front();
  }
  mean /= n;
  if (all_equal) {  // degenerate pools must report an exact zero spread
    s.mean = s.samples.front();
    s.std_dev = 0.0;
    return;
  }
  double var = 0.0;
  for (double v : s.samples) var += (v - mean) * (v - mean);
  s.mean = mean;
  s.std_dev = std::sqrt(var / n);  // the draws are the whole population of interest
}

namespace detail {

/// Everything a draw needs, precomputed once per (fold, member): validation
/// probabilities, gold labels in fold order, and the member's threshold grid
/// scores on its own early-stopping samples.
struct PreparedFold {
  std::vector<LabelTriple> gold;                      // fold order
  std::vector<const ProbabilityTable*> val_tables;    // multi-label, per member
  std::vector<MemberGridScores> grid_scores;          // per member (multi-label)
  std::array<std::vector<const ProbabilityTable*>, kNumTasks> task_tables;  // single-label
};

struct PreparedPool {
  HeadKind head = HeadKind::kMultiLabel;
  std::size_t k = 0;
  std::size_t members_per_fold = 0;
  std::vector<PreparedFold> folds;
  std::vector<std::vector<std::size_t>> group_positions;  // per composition group
  std::vector<double> group_weights;
};

/// Tables are produced in fold order throughout the pipeline; this asserts it
/// instead of re-aligning per draw.
inline const ProbabilityTable& align_is_noop(const ProbabilityTable& t,
                                             const std::vector<std::int64_t>& ids) {
  if (t.sample_ids != ids) {
    throw ConfigError("bootstrap: table " + t.model_id + " is not in fold order");
  }
  return t;
}

inline PreparedPool prepare_pool(const TrainedPool& pool, const GoldLookup& gold,
                                 const BootstrapConfig& cfg) {
  PreparedPool prep;
  prep.head = pool.head;
  prep.k = pool.k;
  if (pool.members.empty()) throw ConfigError("bootstrap: empty pool");

  std::vector<std::vector<const PoolMember*>> by_fold(pool.k);
  for (std::size_t f = 0; f < pool.k; ++f) by_fold[f] = pool.fold_members(f);
  prep.members_per_fold = by_fold[0].size();
  for (std::size_t f = 0; f < pool.k; ++f) {
    if (by_fold[f].size() != prep.members_per_fold) {
      throw ConfigError("bootstrap: folds have different member counts");
    }
  }

  const bool calibrated = cfg.threshold_mode == BootstrapThresholdMode::kCalibratedPerDraw;
  prep.folds.resize(pool.k);
  for (std::size_t f = 0; f < pool.k; ++f) {
    PreparedFold& pf = prep.folds[f];
    const std::vector<const PoolMember*>& members = by_fold[f];
    const std::vector<std::int64_t>& ids = members[0]->val_tables[0].sample_ids;
    pf.gold.reserve(ids.size());
    for (std::int64_t id : ids) pf.gold.push_back(gold_for(gold, id));

    if (pool.head == HeadKind::kMultiLabel) {
      for (const PoolMember* m : members) {
        pf.val_tables.push_back(&align_is_noop(m->val_tables[0], ids));
        if (calibrated) {
          pf.grid_scores.push_back(member_grid_scores(m->es_tables[0], gold, cfg.threshold.grid_step));
        }
      }
    } else {
      for (std::size_t c = 0; c < kNumTasks; ++c) {
        for (const PoolMember* m : members) {
          pf.task_tables[c].push_back(&align_is_noop(m->val_tables[c], ids));
        }
      }
    }
  }

  // Composition groups resolve to member positions 0..members_per_fold-1;
  // group membership is identical across folds by construction.
  std::vector<std::pair<std::string, double>> comp = cfg.composition;
  if (comp.empty()) comp.emplace_back("", 1.0);
  for (const auto& [group, weight] : comp) {
    if (!(weight > 0.0)) throw ConfigError("bootstrap: composition weights must be positive");
    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < prep.members_per_fold; ++i) {
      if (group.empty() || by_fold[0][i]->group == group) positions.push_back(i);
    }
    if (positions.empty()) {
      throw ConfigError("bootstrap: composition group '" + group + "' matches no pool members");
    }
    prep.group_positions.push_back(std::move(positions));
    prep.group_weights.push_back(weight);
  }
  return prep;
}

/// Largest-remainder allocation of `size` slots across the group weights.
inline std::vector<std::size_t> allocate_by_weight(const std::vector<double>& weights,
                                                   std::size_t size) {
  double total = 0.0;
  for (double w : weights) total += w;
  std::vector<std::size_t> counts(weights.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t g = 0; g < weights.size(); ++g) {
    const double exact = static_cast<double>(size) * weights[g] / total;
    counts[g] = static_cast<std::size_t>(exact);
    assigned += counts[g];
    remainders.emplace_back(exact - std::floor(exact), g);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < size; ++i, ++assigned) {
    ++counts[remainders[i % remainders.size()].second];
  }
  return counts;
}

inline std::vector<std::size_t> draw_members(const PreparedPool& prep, std::size_t size, Rng& rng) {
  std::vector<std::size_t> chosen;
  chosen.reserve(size);
  const std::vector<std::size_t> counts = allocate_by_weight(prep.group_weights, size);
  for (std::size_t g = 0; g < counts.size(); ++g) {
    const std::vector<std::size_t>& positions = prep.group_positions[g];
    for (std::size_t i = 0; i < counts[g]; ++i) {
      chosen.push_back(positions[rng.next_below(positions.size())]);
    }
  }
  return chosen;
}

inline double score_draw(const PreparedPool& prep, const std::vector<std::size_t>& chosen,
                         const BootstrapConfig& cfg) {
  const double inv = 1.0 / static_cast<double>(chosen.size());
  double macro_sum = 0.0;
  for (const PreparedFold& fold : prep.folds) {
    std::array<double, kNumTasks> f1s{};
    if (prep.head == HeadKind::kMultiLabel) {
      Thresholds thresholds;
      if (cfg.threshold_mode == BootstrapThresholdMode::kCalibratedPerDraw) {
        std::vector<const MemberGridScores*> grids;
        grids.reserve(chosen.size());
        for (std::size_t pos : chosen) grids.push_back(&fold.grid_scores[pos]);
        thresholds = select_from_grid_scores(grids, cfg.threshold.grid_step);
      }
      const std::size_t n = fold.gold.size();
      for (std::size_t c = 0; c < kNumTasks; ++c) {
        ConfusionMatrix m;
        for (std::size_t i = 0; i < n; ++i) {
          double p = 0.0;
          for (std::size_t pos : chosen) p += fold.val_tables[pos]->probs[i][c];
          const bool pred = p * inv >= thresholds.t[c];
          const bool truth = fold.gold[i][c];
          if (truth && pred) ++m.tp;
          else if (!truth && pred) ++m.fp;
          else if (truth && !pred) ++m.fn;
          else ++m.tn;
        }
        f1s[c] = germeval_f1(m);
      }
    } else {
      const std::size_t n = fold.gold.size();
      for (std::size_t c = 0; c < kNumTasks; ++c) {
        ConfusionMatrix m;
        for (std::size_t i = 0; i < n; ++i) {
          double p = 0.0;
          for (std::size_t pos : chosen) p += fold.task_tables[c][pos]->probs[i][c];
          const bool pred = p * inv >= 0.5;
          const bool truth = fold.gold[i][c];
          if (truth && pred) ++m.tp;
          else if (!truth && pred) ++m.fp;
          else if (truth && !pred) ++m.fn;
          else ++m.tn;
        }
        f1s[c] = germeval_f1(m);
      }
    }
    macro_sum += macro_f1(f1s);
  }
  return macro_sum / static_cast<double>(prep.folds.size());
}

}  // namespace detail

/// The ensemble-size experiment: for every size, draw samples_per_size
/// ensembles with replacement from the pool (respecting the composition
/// weights), score each by fold-averaged macro-F1, and summarize mean and
/// population standard deviation. Per-draw RNG streams are derived from
/// (seed, size, draw), so the result is bit-identical at any thread count.
inline BootstrapSummary run_bootstrap(const TrainedPool& pool, const GoldLookup& gold,
                                      const BootstrapConfig& cfg) {
  if (cfg.samples_per_size < 1) throw ConfigError("bootstrap: samples_per_size must be >= 1");
  const std::vector<std::size_t> sizes = cfg.sizes.empty() ? default_bootstrap_sizes() : cfg.sizes;
  for (std::size_t s : sizes) {
    if (s < 1) throw ConfigError("bootstrap: ensemble sizes must be >= 1");
  }

  const detail::PreparedPool prep = detail::prepare_pool(pool, gold, cfg);

  BootstrapSummary summary;
  summary.seed = cfg.seed;
  summary.pool_size = prep.members_per_fold;
  if (!cfg.composition.empty()) {
    std::string tag;
    for (const auto& [group, weight] : cfg.composition) {
      if (!tag.empty()) tag += '+';
      tag += group + ":" + format_score(weight);
    }
    summary.composition = tag;
  }
  summary.per_size.resize(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    summary.per_size[i].size = sizes[i];
    summary.per_size[i].samples.resize(cfg.samples_per_size);
  }

  struct Job {
    std::size_t size_idx;
    std::size_t draw;
  };
  std::vector<Job> jobs;
  jobs.reserve(sizes.size() * cfg.samples_per_size);
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    for (std::size_t d = 0; d < cfg.samples_per_size; ++d) jobs.push_back({i, d});
  }

  const auto run_job = [&](const Job& job) {
    const std::size_t size = sizes[job.size_idx];
    Rng rng(mix_seed(cfg.seed, 7, size, job.draw));
    const std::vector<std::size_t> chosen = detail::draw_members(prep, size, rng);
    summary.per_size[job.size_idx].samples[job.draw] = detail::score_draw(prep, chosen, cfg);
  };

  std::size_t threads = cfg.threads == 0 ? std::thread::hardware_concurrency() : cfg.threads;
  threads = std::max<std::size_t>(1, std::min(threads, jobs.size()));
  if (threads == 1) {
    for (const Job& job : jobs) run_job(job);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(threads);
    for (std::size_t w = 0; w < threads; ++w) {
      workers.emplace_back([&, w] {
        try {
          for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            run_job(jobs[i]);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& worker : workers) worker.join();
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }

  for (BootstrapSizeSummary& s : summary.per_size) compute_moments(s);
  return summary;
}

/// size, mean_macro_f1, std_macro_f1, n_samples rows.
inline std::string summary_to_csv(const BootstrapSummary& summary, char delimiter = ',') {
  std::string out =
      csv::format_row({"size", "mean_macro_f1", "std_macro_f1", "n_samples"}, delimiter);
  for (const BootstrapSizeSummary& s : summary.per_size) {
    out += csv::format_row({std::to_string(s.size), format_full(s.mean), format_full(s.std_dev),
                            std::to_string(s.samples.size())},
                           delimiter);
  }
  return out;
}

/// Optional full dump: size, draw, macro_f1 rows.
inline std::string samples_to_csv(const BootstrapSummary& summary, char delimiter = ',') {
  std::string out = csv::format_row({"size", "draw", "macro_f1"}, delimiter);
  for (const BootstrapSizeSummary& s : summary.per_size) {
    for (std::size_t d = 0; d < s.samples.size(); ++d) {
      out += csv::format_row({std::to_string(s.size), std::to_string(d), format_full(s.samples[d])},
                             delimiter);
    }
  }
  return out;
}

}  // namespace germeval
