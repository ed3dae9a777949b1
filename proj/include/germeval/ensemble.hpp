#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "germeval/dataset.hpp"
#include "germeval/errors.hpp"
#include "germeval/metrics.hpp"
#include "germeval/prob_table.hpp"
#include "germeval/train.hpp"

namespace germeval {

/// Per-class decision cutoffs on a fixed grid.
struct Thresholds {
  std::array<double, kNumTasks> t = {0.5, 0.5, 0.5};
  double grid_step = 0.025;
};

enum class ThresholdCriterion : std::uint8_t {
  // Maximize each class's F1 separately (the single-model calibration rule).
  kPerClass = 0,
  // Maximize macro-F1. The macro score is the mean of the per-class F1s and
  // each class depends only on its own cutoff, so the maximizer over the
  // threshold triple factorizes into the same per-class argmax; the two
  // criteria select identical grid points and differ only in bookkeeping.
  kMacro = 1,
};

enum class ThresholdAggregation : std::uint8_t {
  // Score every member at every grid point on that member's own
  // early-stopping samples; average the scores across members; argmax.
  kPerMemberScores = 0,
  // Soft-vote the member probabilities on one shared calibration set and
  // scan the grid on the averaged probabilities.
  kAveragedProbabilities = 1,
};

struct ThresholdConfig {
  double grid_step = 0.025;
  ThresholdCriterion criterion = ThresholdCriterion::kMacro;
  ThresholdAggregation aggregation = ThresholdAggregation::kPerMemberScores;
};

inline const char* criterion_name(ThresholdCriterion c) {
  return c == ThresholdCriterion::kPerClass ? "per-class" : "macro";
}

inline const char* aggregation_name(ThresholdAggregation a) {
  return a == ThresholdAggregation::kPerMemberScores ? "per-member-scores"
                                                     : "averaged-probabilities";
}

/// Grid {0, step, 2*step, ...} up to and including 1 when step divides it.
inline std::vector<double> threshold_grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw ConfigError("threshold grid: step must be in (0, 1]");
  std::vector<double> grid;
  for (int k = 0;; ++k) {
    const double value = k * step;
    if (value > 1.0 + 1e-12) break;
    grid.push_back(std::min(value, 1.0));
  }
  return grid;
}

using GoldLookup = std::unordered_map<std::int64_t, LabelTriple>;

inline GoldLookup make_gold_lookup(const Dataset& d) {
  if (!d.labeled()) throw ConfigError("gold lookup requires a labeled dataset");
  GoldLookup gold;
  gold.reserve(d.size());
  for (const Comment& c : d.comments) gold.emplace(c.id, *c.labels);
  return gold;
}

inline const LabelTriple& gold_for(const GoldLookup& gold, std::int64_t id) {
  const auto it = gold.find(id);
  if (it == gold.end()) {
    throw ConfigError("no gold labels for sample id " + std::to_string(id));
  }
  return it->second;
}

/// Elementwise mean of the member probabilities. All tables must cover the
/// same sample ids with the same layout; rows are aligned by id to the first
/// table's order.
inline ProbabilityTable soft_vote(const std::vector<const ProbabilityTable*>& tables) {
  if (tables.empty()) throw ContractError("soft_vote: no member tables");
  const ProbabilityTable& first = *tables.front();
  ProbabilityTable out;
  out.model_id = "ensemble";
  out.head = first.head;
  out.task = first.task;
  out.sample_ids = first.sample_ids;
  out.probs = first.probs;

  // Mean computed as first + mean(deltas): identical members vote to exactly
  // their own table, and a single member passes through bit for bit.
  std::vector<std::array<double, kNumTasks>> delta(first.size(), {0.0, 0.0, 0.0});
  const double inv = 1.0 / static_cast<double>(tables.size());
  for (const ProbabilityTable* t : tables) {
    if (t->head != first.head || (t->head == HeadKind::kSingleLabel && t->task != first.task)) {
      throw ConfigError("soft_vote: member " + t->model_id + " has a different task layout");
    }
    if (t == tables.front()) continue;
    const ProbabilityTable aligned = align_table(*t, first.sample_ids);
    for (std::size_t i = 0; i < aligned.size(); ++i) {
      for (std::size_t c = 0; c < kNumTasks; ++c) {
        delta[i][c] += aligned.probs[i][c] - first.probs[i][c];
      }
    }
  }
  for (std::size_t i = 0; i < first.size(); ++i) {
    for (std::size_t c = 0; c < kNumTasks; ++c) out.probs[i][c] += inv * delta[i][c];
  }
  if (first.head == HeadKind::kSingleLabel) {
    // Unused slots averaged NaNs; rewrite them so the table stays canonical.
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (std::size_t c = 0; c < kNumTasks; ++c) {
        if (c != static_cast<std::size_t>(first.task)) out.probs[i][c] = std::nan("");
      }
    }
  }
  return out;
}

/// One member's F1 score per class per grid point, computed on that member's
/// own early-stopping samples. Precomputable per member: bootstrap draws
/// reuse these across thousands of ensembles.
struct MemberGridScores {
  std::vector<double> grid;
  std::array<std::vector<double>, kNumTasks> f1;  // [class][grid index]
};

inline MemberGridScores member_grid_scores(const ProbabilityTable& es_table, const GoldLookup& gold,
                                           double grid_step) {
  if (es_table.head != HeadKind::kMultiLabel) {
    throw ConfigError("threshold calibration applies to multi-label tables only");
  }
  if (es_table.size() == 0) throw ConfigError("threshold calibration: empty calibration table");
  MemberGridScores out;
  out.grid = threshold_grid(grid_step);
  std::vector<LabelTriple> golds;
  golds.reserve(es_table.size());
  for (std::int64_t id : es_table.sample_ids) golds.push_back(gold_for(gold, id));

  for (std::size_t c = 0; c < kNumTasks; ++c) {
    out.f1[c].resize(out.grid.size());
    for (std::size_t g = 0; g < out.grid.size(); ++g) {
      ConfusionMatrix m;
      for (std::size_t i = 0; i < es_table.size(); ++i) {
        const bool pred = es_table.probs[i][c] >= out.grid[g];
        const bool truth = golds[i][c];
        if (truth && pred) ++m.tp;
        else if (!truth && pred) ++m.fp;
        else if (truth && !pred) ++m.fn;
        else ++m.tn;
      }
      out.f1[c][g] = germeval_f1(m);
    }
  }
  return out;
}

/// Averages precomputed member grids and takes the per-class argmax (smallest
/// maximizing grid value). Because macro-F1 is the mean of the per-class F1s,
/// this argmax also maximizes the member-averaged macro-F1 over the full
/// threshold triple grid.
inline Thresholds select_from_grid_scores(const std::vector<const MemberGridScores*>& members,
                                          double grid_step) {
  if (members.empty()) throw ConfigError("select_thresholds: no members");
  const std::size_t grid_size = members.front()->grid.size();
  Thresholds out;
  out.grid_step = grid_step;
  for (std::size_t c = 0; c < kNumTasks; ++c) {
    double best = -1.0;
    std::size_t best_g = 0;
    for (std::size_t g = 0; g < grid_size; ++g) {
      double mean = 0.0;
      for (const MemberGridScores* m : members) mean += m->f1[c][g];
      mean /= static_cast<double>(members.size());
      if (mean > best) {
        best = mean;
        best_g = g;
      }
    }
    out.t[c] = members.front()->grid[best_g];
  }
  return out;
}

/// Calibrates decision thresholds from the members' early-stopping tables.
inline Thresholds select_thresholds(const std::vector<const ProbabilityTable*>& member_es_tables,
                                    const GoldLookup& gold, const ThresholdConfig& cfg = {}) {
  if (member_es_tables.empty()) throw ConfigError("select_thresholds: no member tables");
  if (cfg.aggregation == ThresholdAggregation::kAveragedProbabilities) {
    const ProbabilityTable avg = soft_vote(member_es_tables);
    const MemberGridScores scores = member_grid_scores(avg, gold, cfg.grid_step);
    return select_from_grid_scores({&scores}, cfg.grid_step);
  }
  std::vector<MemberGridScores> scores;
  scores.reserve(member_es_tables.size());
  for (const ProbabilityTable* t : member_es_tables) {
    scores.push_back(member_grid_scores(*t, gold, cfg.grid_step));
  }
  std::vector<const MemberGridScores*> ptrs;
  ptrs.reserve(scores.size());
  for (const MemberGridScores& s : scores) ptrs.push_back(&s);
  return select_from_grid_scores(ptrs, cfg.grid_step);
}

/// A class is assigned iff its averaged probability reaches the threshold
/// (p >= t; the boundary counts as positive).
inline std::vector<LabelTriple> predict_multilabel(const ProbabilityTable& avg,
                                                   const Thresholds& thresholds) {
  if (avg.head != HeadKind::kMultiLabel) {
    throw ConfigError("predict_multilabel requires a multi-label table");
  }
  std::vector<LabelTriple> out;
  out.reserve(avg.size());
  for (std::size_t i = 0; i < avg.size(); ++i) {
    out.push_back({avg.probs[i][0] >= thresholds.t[0], avg.probs[i][1] >= thresholds.t[1],
                   avg.probs[i][2] >= thresholds.t[2]});
  }
  return out;
}

/// Single-label decision: the output neuron with the larger averaged
/// probability wins. Member pairs sum to 1, so this is exactly
/// p_positive >= 0.5 (ties resolve positive).
inline std::vector<LabelTriple> predict_singlelabel(
    const std::array<const ProbabilityTable*, kNumTasks>& avg_per_task) {
  for (std::size_t c = 0; c < kNumTasks; ++c) {
    if (avg_per_task[c] == nullptr) {
      throw ConfigError(std::string("predict_singlelabel: missing table for task ") +
                        task_name(static_cast<Task>(c)));
    }
    if (avg_per_task[c]->head != HeadKind::kSingleLabel ||
        avg_per_task[c]->task != static_cast<Task>(c)) {
      throw ConfigError("predict_singlelabel: table " + avg_per_task[c]->model_id +
                        " is not a single-label table for task " +
                        task_name(static_cast<Task>(c)));
    }
  }
  const std::vector<std::int64_t>& ids = avg_per_task[0]->sample_ids;
  std::array<ProbabilityTable, kNumTasks> aligned;
  aligned[0] = *avg_per_task[0];
  for (std::size_t c = 1; c < kNumTasks; ++c) aligned[c] = align_table(*avg_per_task[c], ids);

  std::vector<LabelTriple> out;
  out.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    LabelTriple pred{};
    for (std::size_t c = 0; c < kNumTasks; ++c) pred[c] = aligned[c].probs[i][c] >= 0.5;
    out.push_back(pred);
  }
  return out;
}

/// Which members make up an ensemble; entries may repeat (bootstrap draws
/// sample with replacement).
struct EnsembleSpec {
  std::vector<std::size_t> member_indices;
  std::string composition = "default";
};

struct EnsembleFoldResult {
  EvalReport report;
  Thresholds thresholds;  // meaningful for multi-label ensembles
};

/// Soft-vote -> calibrate (multi-label) or argmax (single-label) -> score,
/// for one fold's members against the fold's gold labels.
inline EnsembleFoldResult evaluate_ensemble_members(const std::vector<const PoolMember*>& members,
                                                    const GoldLookup& gold,
                                                    const ThresholdConfig& threshold_cfg = {},
                                                    bool calibrate = true) {
  if (members.empty()) throw ConfigError("evaluate_ensemble: no members");
  EnsembleFoldResult result;
  std::vector<LabelTriple> pred;
  std::vector<std::int64_t> ids;

  if (members.front()->head == HeadKind::kMultiLabel) {
    std::vector<const ProbabilityTable*> val_tables;
    std::vector<const ProbabilityTable*> es_tables;
    for (const PoolMember* m : members) {
      val_tables.push_back(&m->val_tables[0]);
      es_tables.push_back(&m->es_tables[0]);
    }
    const ProbabilityTable avg = soft_vote(val_tables);
    if (calibrate) result.thresholds = select_thresholds(es_tables, gold, threshold_cfg);
    pred = predict_multilabel(avg, result.thresholds);
    ids = avg.sample_ids;
  } else {
    std::array<ProbabilityTable, kNumTasks> avgs;
    for (std::size_t c = 0; c < kNumTasks; ++c) {
      std::vector<const ProbabilityTable*> tables;
      for (const PoolMember* m : members) tables.push_back(&m->val_tables[c]);
      avgs[c] = soft_vote(tables);
    }
    pred = predict_singlelabel({&avgs[0], &avgs[1], &avgs[2]});
    ids = avgs[0].sample_ids;
  }

  std::vector<LabelTriple> gold_labels;
  gold_labels.reserve(ids.size());
  for (std::int64_t id : ids) gold_labels.push_back(gold_for(gold, id));
  result.report = evaluate(gold_labels, pred);
  return result;
}

/// Fold-averaged macro-F1 of one ensemble drawn from a pool: the spec line of
/// the bootstrap experiment.
inline double ensemble_fold_mean_macro(const TrainedPool& pool, const EnsembleSpec& spec,
                                       const GoldLookup& gold,
                                       const ThresholdConfig& threshold_cfg = {},
                                       bool calibrate = true) {
  double sum = 0.0;
  for (std::size_t f = 0; f < pool.k; ++f) {
    const std::vector<const PoolMember*> fold_members = pool.fold_members(f);
    std::vector<const PoolMember*> chosen;
    chosen.reserve(spec.member_indices.size());
    for (std::size_t idx : spec.member_indices) chosen.push_back(fold_members.at(idx));
    sum += evaluate_ensemble_members(chosen, gold, threshold_cfg, calibrate).report.macro;
  }
  return sum / static_cast<double>(pool.k);
}

}  // namespace germeval
