#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "germeval/dataset.hpp"
#include "germeval/errors.hpp"
#include "germeval/features.hpp"
#include "germeval/folds.hpp"
#include "germeval/metrics.hpp"
#include "germeval/model.hpp"
#include "germeval/optimizer.hpp"
#include "germeval/prob_table.hpp"
#include "germeval/rng.hpp"

namespace germeval {

struct TrainConfig {
  std::size_t batch_size = 24;
  std::size_t epochs = 10;
  // The transformer fine-tuning rate is 5e-6; a linear model needs a far
  // larger step to move in 10 epochs, so that is the default here.
  double learning_rate = 0.05;
  double warmup_fraction = 0.30;
  std::size_t eval_every_updates = 40;
  std::size_t patience_evals = 2;
  LrSchedule schedule = LrSchedule::kWarmupConstant;
  AdamWConfig adamw;
  std::uint64_t seed = 0;

  void validate() const {
    if (batch_size < 1 || epochs < 1 || eval_every_updates < 1 || patience_evals < 1) {
      throw ConfigError("train config: counts must be positive");
    }
    if (!(learning_rate > 0.0)) throw ConfigError("train config: learning rate must be positive");
    if (!(warmup_fraction > 0.0 && warmup_fraction < 1.0)) {
      throw ConfigError("train config: warmup fraction must be in (0, 1)");
    }
  }
};

/// Stop when the score has not increased for `patience` consecutive
/// evaluations; remembers which evaluation produced the best score.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}

  /// Returns true if this evaluation improved on the best seen so far.
  bool observe(double score) {
    ++evals_;
    if (score > best_score_) {
      best_score_ = score;
      best_eval_ = evals_;
      stale_ = 0;
      return true;
    }
    ++stale_;
    return false;
  }

  bool should_stop() const { return stale_ >= patience_; }
  double best_score() const { return best_score_; }
  std::size_t best_eval() const { return best_eval_; }  // 1-based
  std::size_t evals() const { return evals_; }

 private:
  std::size_t patience_;
  std::size_t evals_ = 0;
  std::size_t stale_ = 0;
  double best_score_ = -1.0;
  std::size_t best_eval_ = 0;
};

struct TrainLogEval {
  std::uint64_t update = 0;
  double score = 0.0;
  bool improved = false;
};

struct TrainLog {
  std::vector<double> lr_per_update;  // index t-1 holds the rate used at update t
  std::vector<double> loss_per_update;
  std::vector<TrainLogEval> evals;
  std::uint64_t planned_updates = 0;
  std::uint64_t performed_updates = 0;
  double best_score = 0.0;
  std::uint64_t best_update = 0;
  bool stopped_early = false;
};

struct TrainResult {
  LinearModel model;
  TrainLog log;
};

/// A dataset featurized once so many models can train against it.
struct FeaturizedDataset {
  std::vector<std::int64_t> ids;
  std::vector<FeatureVector> features;
  std::vector<LabelTriple> labels;  // empty for unlabeled data
  FeaturizerConfig featurizer;
  std::unordered_map<std::int64_t, std::size_t> index;  // id -> row

  std::size_t row_of(std::int64_t id) const {
    const auto it = index.find(id);
    if (it == index.end()) {
      throw ConfigError("sample id " + std::to_string(id) + " not present in dataset");
    }
    return it->second;
  }
};

inline FeaturizedDataset featurize_dataset(const Dataset& d, const FeaturizerConfig& cfg) {
  FeaturizedDataset out;
  out.featurizer = cfg;
  out.ids.reserve(d.size());
  out.features.reserve(d.size());
  if (d.labeled()) out.labels.reserve(d.size());
  for (const Comment& c : d.comments) {
    out.ids.push_back(c.id);
    out.features.push_back(featurize(c.text, cfg));
    if (d.labeled()) out.labels.push_back(*c.labels);
  }
  out.index = d.id_index();
  return out;
}

namespace detail {

inline double early_stop_score(const LinearModel& m, const FeaturizedDataset& data,
                               const std::vector<std::size_t>& rows) {
  std::vector<LabelTriple> gold;
  std::vector<LabelTriple> pred;
  gold.reserve(rows.size());
  pred.reserve(rows.size());
  for (std::size_t row : rows) {
    gold.push_back(data.labels[row]);
    const std::array<double, kNumTasks> p = predict_one(m, data.features[row]);
    if (m.head == HeadKind::kSingleLabel) {
      LabelTriple t = gold.back();  // off-task slots mirror gold so only the task counts
      t[static_cast<std::size_t>(m.task)] = p[1] >= 0.5;
      pred.push_back(t);
    } else {
      pred.push_back({p[0] >= 0.5, p[1] >= 0.5, p[2] >= 0.5});
    }
  }
  const EvalReport report = evaluate(gold, pred);
  // Multi-label: macro-F1 at fixed 0.5 thresholds (calibration happens later,
  // in the ensemble stage). Single-label: the bound task's F1.
  return m.head == HeadKind::kSingleLabel ? report.f1[static_cast<std::size_t>(m.task)]
                                          : report.macro;
}

}  // namespace detail

/// Trains one linear model under the batch/epoch/warmup/patience scheme.
/// Returns the parameter snapshot that scored best on the early-stopping
/// rows. Deterministic in config.seed.
inline TrainResult train(const FeaturizedDataset& data, const std::vector<std::size_t>& train_rows,
                         const std::vector<std::size_t>& early_stop_rows, const TrainConfig& cfg,
                         HeadKind head, Task task = Task::kToxic) {
  cfg.validate();
  if (early_stop_rows.empty()) throw ConfigError("train: empty early-stopping set");
  if (train_rows.empty()) throw ConfigError("train: empty training set");
  if (data.labels.empty()) throw ConfigError("train: dataset has no labels");
  for (std::size_t row : early_stop_rows) {
    if (std::find(train_rows.begin(), train_rows.end(), row) != train_rows.end()) {
      throw ConfigError("train: early-stopping row " + std::to_string(row) +
                        " overlaps the training set");
    }
  }

  LinearModel model = make_model(head, task, data.featurizer, cfg.seed);
  init_weights(model);

  const std::size_t updates_per_epoch = (train_rows.size() + cfg.batch_size - 1) / cfg.batch_size;
  const std::uint64_t planned = static_cast<std::uint64_t>(updates_per_epoch) * cfg.epochs;

  TrainLog log;
  log.planned_updates = planned;
  log.lr_per_update.reserve(planned);
  log.loss_per_update.reserve(planned);

  EarlyStopper stopper(cfg.patience_evals);
  LinearModel best = model;
  std::uint64_t best_update = 0;

  AdamWState w_state(model.weights.size());
  AdamWState b_state(model.bias.size());
  Gradient grad;
  Rng order_rng(mix_seed(cfg.seed, 4));
  std::vector<std::size_t> order = train_rows;

  std::uint64_t t = 0;
  std::uint64_t last_eval_update = 0;
  bool stop = false;
  for (std::size_t epoch = 0; epoch < cfg.epochs && !stop; ++epoch) {
    order_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size() && !stop; start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<const FeatureVector*> batch;
      std::vector<LabelTriple> gold;
      batch.reserve(end - start);
      gold.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(&data.features[order[i]]);
        gold.push_back(data.labels[order[i]]);
      }

      const double loss = loss_and_gradient(model, batch, gold, grad);
      ++t;
      const double lr =
          learning_rate_at(t, planned, cfg.learning_rate, cfg.warmup_fraction, cfg.schedule);
      adamw_step(model.weights, grad.weights, w_state, lr, cfg.adamw, t);
      adamw_step(model.bias, grad.bias, b_state, lr, cfg.adamw, t);
      log.lr_per_update.push_back(lr);
      log.loss_per_update.push_back(loss);

      if (t % cfg.eval_every_updates == 0) {
        const double score = detail::early_stop_score(model, data, early_stop_rows);
        const bool improved = stopper.observe(score);
        if (improved) {
          best = model;
          best_update = t;
        }
        log.evals.push_back({t, score, improved});
        last_eval_update = t;
        stop = stopper.should_stop();
      }
    }
  }
  // Score any trailing updates so the final state can still win.
  if (!stop && t > last_eval_update) {
    const double score = detail::early_stop_score(model, data, early_stop_rows);
    const bool improved = stopper.observe(score);
    if (improved) {
      best = model;
      best_update = t;
    }
    log.evals.push_back({t, score, improved});
  }

  log.performed_updates = t;
  log.stopped_early = stop;
  log.best_score = stopper.best_score();
  log.best_update = best_update;
  return TrainResult{std::move(best), std::move(log)};
}

// --- pool training ----------------------------------------------------------

/// One ensemble member: a multi-label model's tables, or the three per-task
/// tables of a single-label member triple.
struct PoolMember {
  std::size_t fold = 0;
  std::size_t member = 0;
  std::string group = "default";
  HeadKind head = HeadKind::kMultiLabel;
  std::vector<std::string> model_ids;             // 1 (multi) or 3 (single, task order)
  std::vector<ProbabilityTable> val_tables;       // same arity
  std::vector<ProbabilityTable> es_tables;        // predictions on own early-stop ids
  std::vector<std::vector<std::int64_t>> es_ids;  // per model
};

struct TrainedPool {
  std::size_t k = 0;
  HeadKind head = HeadKind::kMultiLabel;
  std::vector<PoolMember> members;

  std::vector<const PoolMember*> fold_members(std::size_t fold) const {
    std::vector<const PoolMember*> out;
    for (const PoolMember& m : members) {
      if (m.fold == fold) out.push_back(&m);
    }
    return out;
  }
};

struct PoolTrainOptions {
  std::size_t count = 1;           // members per fold
  HeadKind head = HeadKind::kMultiLabel;
  std::string group = "default";
  std::uint64_t master_seed = 0;
  std::size_t threads = 0;         // 0 = hardware concurrency
  std::string out_dir;             // empty = keep in memory only
};

namespace detail {

struct PoolJob {
  std::size_t fold;
  std::size_t member;
  Task task;        // task slot 0 for multi-label
  std::size_t slot; // index into the member's model vectors
};

inline std::string pool_model_id(std::size_t fold, std::size_t member, HeadKind head, Task task) {
  char buf[64];
  if (head == HeadKind::kSingleLabel) {
    std::snprintf(buf, sizeof(buf), "f%zu_m%03zu_%s", fold, member, task_name(task));
  } else {
    std::snprintf(buf, sizeof(buf), "f%zu_m%03zu", fold, member);
  }
  return buf;
}

}  // namespace detail

/// Trains `count` members per fold. Members differ in classification-layer
/// initialization and in the early-stopping samples drawn from the fold's
/// training pool; everything is keyed off (master_seed, fold, member, task)
/// streams, so results are identical at any thread count. Persists model
/// snapshots plus validation and early-stop probability tables when out_dir
/// is set.
inline TrainedPool train_pool(const FeaturizedDataset& data, const FoldPlan& plan,
                              const TrainConfig& train_cfg, const PoolTrainOptions& opts) {
  if (opts.count < 1) throw ConfigError("train_pool: count must be >= 1");
  train_cfg.validate();

  const std::size_t k = static_cast<std::size_t>(plan.k);
  const std::size_t models_per_member = opts.head == HeadKind::kSingleLabel ? kNumTasks : 1;

  TrainedPool pool;
  pool.k = k;
  pool.head = opts.head;
  pool.members.resize(k * opts.count);

  std::vector<detail::PoolJob> jobs;
  for (std::size_t f = 0; f < k; ++f) {
    for (std::size_t m = 0; m < opts.count; ++m) {
      PoolMember& member = pool.members[f * opts.count + m];
      member.fold = f;
      member.member = m;
      member.group = opts.group;
      member.head = opts.head;
      member.model_ids.resize(models_per_member);
      member.val_tables.resize(models_per_member);
      member.es_tables.resize(models_per_member);
      member.es_ids.resize(models_per_member);
      for (std::size_t s = 0; s < models_per_member; ++s) {
        jobs.push_back({f, m, static_cast<Task>(opts.head == HeadKind::kSingleLabel ? s : 0), s});
      }
    }
  }

  std::vector<std::vector<std::int64_t>> pools_by_fold(k);
  for (std::size_t f = 0; f < k; ++f) pools_by_fold[f] = plan.training_pool(f);

  namespace fs = std::filesystem;
  if (!opts.out_dir.empty()) {
    fs::create_directories(fs::path(opts.out_dir) / "models");
    fs::create_directories(fs::path(opts.out_dir) / "tables");
  }

  const auto run_job = [&](const detail::PoolJob& job) {
    const std::uint64_t fold64 = job.fold;
    const std::uint64_t member64 = job.member;
    const std::uint64_t task64 = static_cast<std::uint64_t>(job.task);

    const std::vector<std::int64_t>& fold_pool = pools_by_fold[job.fold];
    const std::vector<std::int64_t> es =
        draw_early_stop(fold_pool, plan.fraction, mix_seed(opts.master_seed, 102, fold64, member64, task64));
    std::unordered_set<std::int64_t> es_set(es.begin(), es.end());

    std::vector<std::size_t> train_rows;
    train_rows.reserve(fold_pool.size() - es.size());
    for (std::int64_t id : fold_pool) {
      if (!es_set.count(id)) train_rows.push_back(data.row_of(id));
    }
    std::vector<std::size_t> es_rows;
    es_rows.reserve(es.size());
    for (std::int64_t id : es) es_rows.push_back(data.row_of(id));

    TrainConfig cfg = train_cfg;
    cfg.seed = mix_seed(opts.master_seed, 101, fold64, member64, task64);
    TrainResult result = train(data, train_rows, es_rows, cfg, opts.head, job.task);

    const std::string model_id = detail::pool_model_id(job.fold, job.member, opts.head, job.task);
    const std::vector<std::int64_t>& val_ids = plan.folds[job.fold];
    std::vector<const FeatureVector*> val_feats;
    val_feats.reserve(val_ids.size());
    for (std::int64_t id : val_ids) val_feats.push_back(&data.features[data.row_of(id)]);
    std::vector<const FeatureVector*> es_feats;
    es_feats.reserve(es_rows.size());
    for (std::size_t row : es_rows) es_feats.push_back(&data.features[row]);

    PoolMember& member = pool.members[job.fold * opts.count + job.member];
    member.model_ids[job.slot] = model_id;
    member.val_tables[job.slot] = predict_proba(result.model, val_ids, val_feats, model_id);
    member.es_tables[job.slot] = predict_proba(result.model, es, es_feats, model_id);
    member.es_ids[job.slot] = es;

    if (!opts.out_dir.empty()) {
      const fs::path base(opts.out_dir);
      save_model(result.model, (base / "models" / (model_id + ".gem")).string());
      save_table(member.val_tables[job.slot], (base / "tables" / (model_id + ".val.csv")).string());
      save_table(member.es_tables[job.slot], (base / "tables" / (model_id + ".es.csv")).string());
    }
  };

  std::size_t threads = opts.threads == 0 ? std::thread::hardware_concurrency() : opts.threads;
  threads = std::max<std::size_t>(1, std::min(threads, jobs.size()));
  if (threads == 1) {
    for (const auto& job : jobs) run_job(job);
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

  if (!opts.out_dir.empty()) {
    nlohmann::json members = nlohmann::json::array();
    for (const PoolMember& m : pool.members) {
      members.push_back({{"fold", m.fold},
                         {"member", m.member},
                         {"group", m.group},
                         {"head", head_name(m.head)},
                         {"model_ids", m.model_ids}});
    }
    const nlohmann::json manifest = {{"master_seed", opts.master_seed},
                                     {"k", k},
                                     {"count", opts.count},
                                     {"head", head_name(opts.head)},
                                     {"group", opts.group},
                                     {"members", members}};
    csv::write_file((std::filesystem::path(opts.out_dir) / "pool.json").string(),
                    manifest.dump(2) + "\n");
  }
  return pool;
}

/// Reads a persisted pool's manifest and probability tables (model snapshots
/// stay on disk; `predict` loads those on demand).
inline TrainedPool load_pool(const std::string& pool_dir) {
  namespace fs = std::filesystem;
  const fs::path base(pool_dir);
  const nlohmann::json manifest = nlohmann::json::parse(csv::read_file((base / "pool.json").string()));

  TrainedPool pool;
  pool.k = manifest.at("k").get<std::size_t>();
  pool.head = manifest.at("head").get<std::string>() == "single-label" ? HeadKind::kSingleLabel
                                                                       : HeadKind::kMultiLabel;
  for (const auto& jm : manifest.at("members")) {
    PoolMember m;
    m.fold = jm.at("fold").get<std::size_t>();
    m.member = jm.at("member").get<std::size_t>();
    m.group = jm.at("group").get<std::string>();
    m.head = jm.at("head").get<std::string>() == "single-label" ? HeadKind::kSingleLabel
                                                                : HeadKind::kMultiLabel;
    for (const auto& id : jm.at("model_ids")) {
      const std::string model_id = id.get<std::string>();
      m.model_ids.push_back(model_id);
      m.val_tables.push_back(load_table((base / "tables" / (model_id + ".val.csv")).string()));
      m.es_tables.push_back(load_table((base / "tables" / (model_id + ".es.csv")).string()));
      m.es_ids.push_back(m.es_tables.back().sample_ids);
    }
    pool.members.push_back(std::move(m));
  }
  return pool;
}

}  // namespace germeval
