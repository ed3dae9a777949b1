#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "germeval/bootstrap.hpp"
#include "germeval/csv.hpp"
#include "germeval/dataset.hpp"
#include "germeval/ensemble.hpp"
#include "germeval/errors.hpp"
#include "germeval/folds.hpp"
#include "germeval/manifest.hpp"
#include "germeval/metrics.hpp"
#include "germeval/model.hpp"
#include "germeval/prob_table.hpp"
#include "germeval/svg.hpp"
#include "germeval/train.hpp"

namespace germeval::cli {

namespace fs = std::filesystem;

namespace detail {

/// Output directory handling: explicit --out wins; otherwise runs land in
/// runs/run-<config-hash> so runs that differ only in configuration stay
/// side by side.
inline std::string resolve_out_dir(const std::string& out, const std::string& command,
                                   const nlohmann::json& config) {
  std::string dir = out;
  if (dir.empty()) {
    dir = (fs::path("runs") / (command + "-" + config_hash(config).substr(0, 12))).string();
  }
  fs::create_directories(dir);
  return dir;
}

inline DatasetSchema schema_from(const std::string& id_col, const std::string& text_col,
                                 const std::string& toxic_col, const std::string& engaging_col,
                                 const std::string& fact_col, const std::string& delimiter) {
  DatasetSchema schema;
  schema.id_column = id_col;
  schema.text_column = text_col;
  schema.label_columns = {toxic_col, engaging_col, fact_col};
  if (delimiter.size() != 1) throw ConfigError("--delimiter must be a single character");
  schema.delimiter = delimiter[0];
  return schema;
}

inline void add_schema_flags(CLI::App* cmd, std::string& id_col, std::string& text_col,
                             std::string& toxic_col, std::string& engaging_col,
                             std::string& fact_col, std::string& delimiter) {
  cmd->add_option("--id-column", id_col, "Sample id column (created when absent)");
  cmd->add_option("--text-column", text_col, "Comment text column");
  cmd->add_option("--toxic-column", toxic_col, "Toxic label column");
  cmd->add_option("--engaging-column", engaging_col, "Engaging label column");
  cmd->add_option("--fact-column", fact_col, "Fact-claiming label column");
  cmd->add_option("--delimiter", delimiter, "Field delimiter of tabular files");
}

inline std::string answer_csv(const std::vector<std::int64_t>& ids,
                              const std::vector<LabelTriple>& pred, const DatasetSchema& schema) {
  std::string out = csv::format_row({"comment_id", schema.label_columns[0],
                                     schema.label_columns[1], schema.label_columns[2]},
                                    schema.delimiter);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out += csv::format_row({std::to_string(ids[i]), pred[i][0] ? "1" : "0",
                            pred[i][1] ? "1" : "0", pred[i][2] ? "1" : "0"},
                           schema.delimiter);
  }
  return out;
}

inline HeadKind parse_head(const std::string& head) {
  if (head == "multi" || head == "multi-label") return HeadKind::kMultiLabel;
  if (head == "single" || head == "single-label") return HeadKind::kSingleLabel;
  throw ConfigError("unknown head type '" + head + "' (expected multi|single)");
}

inline std::vector<std::pair<std::string, double>> parse_composition(const std::string& spec) {
  std::vector<std::pair<std::string, double>> out;
  if (spec.empty()) return out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    std::size_t comma = spec.find(',', pos);
    if (comma == std::string::npos) comma = spec.size();
    const std::string part = spec.substr(pos, comma - pos);
    const std::size_t eq = part.find('=');
    if (eq == std::string::npos) {
      out.emplace_back(part, 1.0);
    } else {
      out.emplace_back(part.substr(0, eq), std::stod(part.substr(eq + 1)));
    }
    pos = comma + 1;
    if (comma == spec.size()) break;
  }
  return out;
}

}  // namespace detail

// --- preprocess -------------------------------------------------------------

inline int cmd_preprocess(const std::string& input, const DatasetSchema& schema,
                          std::size_t max_tokens, const std::string& out_dir_flag,
                          nlohmann::json config_echo) {
  const Dataset raw = load_dataset(input, schema);
  const Dataset deduped = deduplicate(raw);
  PreprocessStats stats;
  stats.input_rows = raw.size();
  stats.after_dedup = deduped.size();
  const Dataset clean = preprocess_dataset(deduped, max_tokens, &stats);

  const std::string out_dir = detail::resolve_out_dir(out_dir_flag, "preprocess", config_echo);
  const std::string dataset_path = (fs::path(out_dir) / "dataset.csv").string();
  save_dataset(clean, dataset_path, schema);

  const nlohmann::json report = {
      {"input_rows", stats.input_rows},
      {"after_dedup", stats.after_dedup},
      {"duplicates_removed", stats.input_rows - stats.after_dedup},
      {"truncation_affected", stats.truncation_affected},
      {"max_tokens", stats.max_tokens},
      {"note", "truncation counts use whitespace tokens, not a subword vocabulary"}};
  const std::string report_path = (fs::path(out_dir) / "preprocess_report.json").string();
  csv::write_file(report_path, report.dump(2) + "\n");

  RunManifest manifest;
  manifest.command = "preprocess";
  manifest.config = std::move(config_echo);
  manifest.add_input(input);
  manifest.add_output(dataset_path);
  manifest.add_output(report_path);
  manifest.write(out_dir);

  std::cout << "preprocess: " << stats.input_rows << " -> " << stats.after_dedup
            << " after dedup; " << stats.truncation_affected
            << " comments over " << max_tokens << " tokens (truncated)\n"
            << "wrote " << dataset_path << "\n";
  return 0;
}

// --- split ------------------------------------------------------------------

inline int cmd_split(const std::string& input, const DatasetSchema& schema, int k, double fraction,
                     std::uint64_t seed, const std::string& out_dir_flag,
                     nlohmann::json config_echo) {
  const Dataset d = load_dataset(input, schema);
  const FoldPlan plan = make_fold_plan(d, k, fraction, seed);
  validate_fold_plan(plan, &d);

  const std::string out_dir = detail::resolve_out_dir(out_dir_flag, "split", config_echo);
  const std::string plan_path = (fs::path(out_dir) / "folds.json").string();
  save_fold_plan(plan, plan_path);

  RunManifest manifest;
  manifest.command = "split";
  manifest.config = std::move(config_echo);
  manifest.add_input(input);
  manifest.add_output(plan_path);
  manifest.write(out_dir);

  std::cout << "split: " << d.size() << " samples into " << k << " folds (fold sizes:";
  for (const auto& fold : plan.folds) std::cout << " " << fold.size();
  std::cout << ")\nwrote " << plan_path << "\n";
  return 0;
}

// --- train-pool ---------------------------------------------------------------

inline int cmd_train_pool(const std::string& input, const DatasetSchema& schema,
                          const std::string& folds_path, const TrainConfig& train_cfg,
                          const FeaturizerConfig& feat_cfg, const PoolTrainOptions& opts_in,
                          const std::string& out_dir_flag, nlohmann::json config_echo) {
  const Dataset d = load_dataset(input, schema);
  if (!d.labeled()) throw ConfigError("train-pool requires a labeled dataset");
  const FoldPlan plan = load_fold_plan(folds_path);
  validate_fold_plan(plan, &d);
  const FeaturizedDataset data = featurize_dataset(d, feat_cfg);

  PoolTrainOptions opts = opts_in;
  const std::string out_dir = detail::resolve_out_dir(out_dir_flag, "pool", config_echo);
  opts.out_dir = out_dir;
  const TrainedPool pool = train_pool(data, plan, train_cfg, opts);

  RunManifest manifest;
  manifest.command = "train-pool";
  manifest.config = std::move(config_echo);
  manifest.add_input(input);
  manifest.add_input(folds_path);
  manifest.add_output((fs::path(out_dir) / "pool.json").string());
  manifest.write(out_dir);

  std::cout << "train-pool: trained " << pool.members.size() << " members ("
            << head_name(opts.head) << ", " << opts.count << " per fold, group '" << opts.group
            << "')\nwrote " << (fs::path(out_dir) / "pool.json").string() << "\n";
  return 0;
}

// --- predict ------------------------------------------------------------------

inline int cmd_predict(const std::string& model_path, const std::string& input,
                       const DatasetSchema& schema, std::string model_id, bool apply_preprocess,
                       const std::string& out_dir_flag, nlohmann::json config_echo) {
  const LinearModel model = load_model(model_path);
  Dataset d = load_dataset(input, schema);
  if (apply_preprocess) d = preprocess_dataset(deduplicate(d));
  if (model_id.empty()) model_id = fs::path(model_path).stem().string();

  std::vector<std::int64_t> ids;
  std::vector<FeatureVector> feats;
  ids.reserve(d.size());
  feats.reserve(d.size());
  for (const Comment& c : d.comments) {
    ids.push_back(c.id);
    feats.push_back(featurize(c.text, model.featurizer));
  }
  std::vector<const FeatureVector*> ptrs;
  ptrs.reserve(feats.size());
  for (const FeatureVector& f : feats) ptrs.push_back(&f);
  const ProbabilityTable table = predict_proba(model, ids, ptrs, model_id);

  const std::string out_dir = detail::resolve_out_dir(out_dir_flag, "predict", config_echo);
  const std::string table_path = (fs::path(out_dir) / (model_id + ".probs.csv")).string();
  save_table(table, table_path, schema.delimiter);

  RunManifest manifest;
  manifest.command = "predict";
  manifest.config = std::move(config_echo);
  manifest.add_input(model_path);
  manifest.add_input(input);
  manifest.add_output(table_path);
  manifest.write(out_dir);

  std::cout << "predict: " << table.size() << " rows for model " << model_id << "\nwrote "
            << table_path << "\n";
  return 0;
}

// --- ensemble-eval --------------------------------------------------------------

struct EnsembleEvalOptions {
  std::vector<std::string> tables;              // member probability tables
  std::vector<std::string> calibration_tables;  // early-stop tables for threshold calibration
  std::string pool_dir;                         // pool mode instead of table mode
  std::string folds_path;
  std::string gold_path;         // labeled dataset; optional in table mode
  std::string calibration_gold;  // defaults to gold_path
  std::optional<std::array<double, kNumTasks>> fixed_thresholds;
  ThresholdConfig threshold;
};

namespace detail {

struct TableModeResult {
  std::vector<std::int64_t> ids;
  std::vector<LabelTriple> pred;
  std::optional<Thresholds> thresholds;
};

inline TableModeResult eval_tables(const std::vector<ProbabilityTable>& tables,
                                   const EnsembleEvalOptions& opt, const GoldLookup* calib_gold) {
  TableModeResult result;
  const bool single = tables.front().head == HeadKind::kSingleLabel;
  for (const ProbabilityTable& t : tables) {
    if ((t.head == HeadKind::kSingleLabel) != single) {
      throw ConfigError("ensemble-eval: cannot mix single-label and multi-label member tables");
    }
  }
  if (single) {
    std::array<std::vector<const ProbabilityTable*>, kNumTasks> by_task;
    for (const ProbabilityTable& t : tables) {
      by_task[static_cast<std::size_t>(t.task)].push_back(&t);
    }
    std::array<ProbabilityTable, kNumTasks> avgs;
    for (std::size_t c = 0; c < kNumTasks; ++c) {
      if (by_task[c].empty()) {
        throw ConfigError(std::string("ensemble-eval: no member table for task ") +
                          task_name(static_cast<Task>(c)));
      }
      avgs[c] = soft_vote(by_task[c]);
    }
    result.pred = predict_singlelabel({&avgs[0], &avgs[1], &avgs[2]});
    result.ids = avgs[0].sample_ids;
    return result;
  }

  std::vector<const ProbabilityTable*> ptrs;
  for (const ProbabilityTable& t : tables) ptrs.push_back(&t);
  const ProbabilityTable avg = soft_vote(ptrs);

  Thresholds thresholds;
  thresholds.grid_step = opt.threshold.grid_step;
  if (opt.fixed_thresholds) {
    thresholds.t = *opt.fixed_thresholds;
  } else if (!opt.calibration_tables.empty()) {
    if (!calib_gold) {
      throw ConfigError("ensemble-eval: threshold calibration needs gold labels "
                        "(--gold or --calibration-gold)");
    }
    std::vector<ProbabilityTable> calib;
    calib.reserve(opt.calibration_tables.size());
    for (const std::string& path : opt.calibration_tables) calib.push_back(load_table(path));
    std::vector<const ProbabilityTable*> calib_ptrs;
    for (const ProbabilityTable& t : calib) calib_ptrs.push_back(&t);
    thresholds = select_thresholds(calib_ptrs, *calib_gold, opt.threshold);
  }
  result.thresholds = thresholds;
  result.pred = predict_multilabel(avg, thresholds);
  result.ids = avg.sample_ids;
  return result;
}

}  // namespace detail

inline int cmd_ensemble_eval(const EnsembleEvalOptions& opt, const DatasetSchema& schema,
                             const std::string& out_dir_flag, nlohmann::json config_echo) {
  const std::string out_dir = detail::resolve_out_dir(out_dir_flag, "ensemble-eval", config_echo);

  std::optional<Dataset> gold_data;
  std::optional<GoldLookup> gold;
  if (!opt.gold_path.empty()) {
    gold_data = load_dataset(opt.gold_path, schema);
    gold = make_gold_lookup(*gold_data);
  }
  std::optional<GoldLookup> calib_gold = gold;
  if (!opt.calibration_gold.empty()) {
    calib_gold = make_gold_lookup(load_dataset(opt.calibration_gold, schema));
  }

  RunManifest manifest;
  manifest.command = "ensemble-eval";
  manifest.config = config_echo;
  nlohmann::json report = nlohmann::json::object();

  if (!opt.pool_dir.empty()) {
    // Pool mode: the full pool votes on every validation fold.
    if (!gold) throw ConfigError("ensemble-eval: pool mode requires --gold");
    const TrainedPool pool = load_pool(opt.pool_dir);
    const FoldPlan plan = load_fold_plan(opt.folds_path);
    manifest.add_input(opt.folds_path);

    nlohmann::json per_fold = nlohmann::json::array();
    double macro_sum = 0.0;
    for (std::size_t f = 0; f < pool.k; ++f) {
      const EnsembleFoldResult r =
          evaluate_ensemble_members(pool.fold_members(f), *gold, opt.threshold);
      nlohmann::json entry = eval_report_to_json(r.report);
      if (pool.head == HeadKind::kMultiLabel) {
        entry["thresholds"] = {{"toxic", r.thresholds.t[0]},
                               {"engaging", r.thresholds.t[1]},
                               {"fact", r.thresholds.t[2]}};
      }
      entry["fold"] = f;
      per_fold.push_back(entry);
      macro_sum += r.report.macro;
    }
    report["per_fold"] = per_fold;
    report["fold_mean_macro_f1"] = macro_sum / static_cast<double>(pool.k);
    report["criterion"] = criterion_name(opt.threshold.criterion);
    report["aggregation"] = aggregation_name(opt.threshold.aggregation);
    report["grid_step"] = opt.threshold.grid_step;

    std::cout << "ensemble-eval (pool): fold-mean macro-F1 = "
              << format_score(macro_sum / static_cast<double>(pool.k)) << "\n";
  } else {
    if (opt.tables.empty()) throw ConfigError("ensemble-eval: provide --tables or --pool");
    std::vector<ProbabilityTable> tables;
    tables.reserve(opt.tables.size());
    for (const std::string& path : opt.tables) {
      tables.push_back(load_table(path));
      manifest.add_input(path);
    }
    const detail::TableModeResult result =
        detail::eval_tables(tables, opt, calib_gold ? &*calib_gold : nullptr);

    const std::string pred_path = (fs::path(out_dir) / "predictions.csv").string();
    csv::write_file(pred_path, detail::answer_csv(result.ids, result.pred, schema));
    manifest.add_output(pred_path);

    if (result.thresholds) {
      report["thresholds"] = {{"toxic", result.thresholds->t[0]},
                              {"engaging", result.thresholds->t[1]},
                              {"fact", result.thresholds->t[2]}};
      report["criterion"] = criterion_name(opt.threshold.criterion);
      report["aggregation"] = aggregation_name(opt.threshold.aggregation);
      report["grid_step"] = opt.threshold.grid_step;
    }
    if (gold) {
      std::vector<LabelTriple> gold_labels;
      gold_labels.reserve(result.ids.size());
      for (std::int64_t id : result.ids) gold_labels.push_back(gold_for(*gold, id));
      const EvalReport eval_report = evaluate(gold_labels, result.pred);
      report.update(eval_report_to_json(eval_report));
      const std::string row_path = (fs::path(out_dir) / "eval_report.csv").string();
      csv::write_file(row_path, eval_report_csv(eval_report, schema.delimiter));
      manifest.add_output(row_path);
      std::cout << "ensemble-eval: macro-F1 " << format_score(eval_report.macro) << " (toxic "
                << format_score(eval_report.f1[0]) << ", engaging "
                << format_score(eval_report.f1[1]) << ", fact " << format_score(eval_report.f1[2])
                << ")\n";
    } else {
      std::cout << "ensemble-eval: wrote predictions for " << result.ids.size()
                << " samples (no gold labels given)\n";
    }
  }

  const std::string report_path = (fs::path(out_dir) / "eval_report.json").string();
  csv::write_file(report_path, report.dump(2) + "\n");
  manifest.add_output(report_path);
  if (!opt.gold_path.empty()) manifest.add_input(opt.gold_path);
  manifest.write(out_dir);
  std::cout << "wrote " << report_path << "\n";
  return 0;
}

// --- bootstrap -------------------------------------------------------------------

inline int cmd_bootstrap(const std::vector<std::string>& pool_dirs, const std::string& gold_path,
                         const DatasetSchema& schema, const BootstrapConfig& cfg, bool dump_samples,
                         const std::string& out_dir_flag, nlohmann::json config_echo) {
  if (pool_dirs.empty()) throw ConfigError("bootstrap: provide at least one --pool");
  TrainedPool pool = load_pool(pool_dirs.front());
  for (std::size_t i = 1; i < pool_dirs.size(); ++i) {
    TrainedPool extra = load_pool(pool_dirs[i]);
    if (extra.k != pool.k) throw ConfigError("bootstrap: pools have different fold counts");
    if (extra.head != pool.head) {
      throw ConfigError("bootstrap: pools mix single-label and multi-label members");
    }
    for (PoolMember& m : extra.members) pool.members.push_back(std::move(m));
  }

  const Dataset gold_data = load_dataset(gold_path, schema);
  const GoldLookup gold = make_gold_lookup(gold_data);
  const BootstrapSummary summary = run_bootstrap(pool, gold, cfg);

  const std::string out_dir = detail::resolve_out_dir(out_dir_flag, "bootstrap", config_echo);
  const std::string summary_path = (fs::path(out_dir) / "bootstrap_summary.csv").string();
  csv::write_file(summary_path, summary_to_csv(summary, schema.delimiter));

  RunManifest manifest;
  manifest.command = "bootstrap";
  manifest.config = std::move(config_echo);
  manifest.add_input(gold_path);
  for (const std::string& dir : pool_dirs) manifest.add_input((fs::path(dir) / "pool.json").string());
  manifest.add_output(summary_path);
  if (dump_samples) {
    const std::string samples_path = (fs::path(out_dir) / "bootstrap_samples.csv").string();
    csv::write_file(samples_path, samples_to_csv(summary, schema.delimiter));
    manifest.add_output(samples_path);
  }
  manifest.write(out_dir);

  std::cout << "bootstrap: " << summary.per_size.size() << " sizes x "
            << cfg.samples_per_size << " draws from a pool of " << summary.pool_size
            << " members per fold\n";
  for (const BootstrapSizeSummary& s : summary.per_size) {
    std::cout << "  size " << s.size << ": mean " << format_score(s.mean) << " std "
              << format_score(s.std_dev) << "\n";
  }
  std::cout << "wrote " << summary_path << "\n";
  return 0;
}

// --- plot ------------------------------------------------------------------------

inline int cmd_plot(const std::vector<std::string>& summaries, const std::string& band_label,
                    const std::string& title, const DatasetSchema& schema,
                    const std::string& out_dir_flag, nlohmann::json config_echo) {
  if (summaries.empty()) throw ConfigError("plot: provide at least one --summary");
  std::vector<svg::Series> series;
  for (const std::string& entry : summaries) {
    // "label=path" or bare path (label = file stem).
    std::string label;
    std::string path = entry;
    const std::size_t eq = entry.find('=');
    if (eq != std::string::npos && entry.find(fs::path::preferred_separator) > eq) {
      label = entry.substr(0, eq);
      path = entry.substr(eq + 1);
    } else {
      label = fs::path(entry).stem().string();
    }
    const std::vector<csv::Row> rows = csv::parse_file(path, schema.delimiter);
    if (rows.size() < 2 || rows.front().fields.size() < 3) {
      throw SchemaError(path + ": expected a bootstrap summary file");
    }
    svg::Series s;
    s.label = label;
    std::vector<double> stds;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].fields.size() == 1 && rows[r].fields[0].empty()) continue;
      s.x.push_back(parse_double(rows[r].fields[0], rows[r].line));
      s.y.push_back(parse_double(rows[r].fields[1], rows[r].line));
      stds.push_back(parse_double(rows[r].fields[2], rows[r].line));
    }
    const bool banded = band_label.empty() ? series.empty() : label == band_label;
    if (banded) s.band = stds;
    series.push_back(std::move(s));
  }

  svg::ChartOptions opt;
  if (!title.empty()) opt.title = title;
  const std::string out_dir = detail::resolve_out_dir(out_dir_flag, "plot", config_echo);
  const std::string svg_path = (fs::path(out_dir) / "figure.svg").string();
  csv::write_file(svg_path, svg::line_chart(series, opt));

  RunManifest manifest;
  manifest.command = "plot";
  manifest.config = std::move(config_echo);
  for (const std::string& entry : summaries) {
    const std::size_t eq = entry.find('=');
    manifest.add_input(eq != std::string::npos && entry.find(fs::path::preferred_separator) > eq
                           ? entry.substr(eq + 1)
                           : entry);
  }
  manifest.add_output(svg_path);
  manifest.write(out_dir);

  std::cout << "plot: " << series.size() << " series\nwrote " << svg_path << "\n";
  return 0;
}

// --- argument wiring ---------------------------------------------------------------

inline int run(std::vector<std::string> args) {
  CLI::App app{"GermEval 2021 ensemble classification pipeline"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read defaults from a configuration file (flags override)");

  std::string out_dir;
  std::string id_col = "comment_id", text_col = "comment_text", toxic_col = "Sub1_Toxic",
              engaging_col = "Sub2_Engaging", fact_col = "Sub3_FactClaiming", delimiter = ",";
  std::uint64_t seed = 0;

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Deduplicate and clean a comment dataset");
  std::string pre_input;
  std::size_t pre_max_tokens = text::kDefaultMaxTokens;
  pre->add_option("--input", pre_input, "Raw dataset file")->required();
  pre->add_option("--max-tokens", pre_max_tokens, "Token cap per comment");
  pre->add_option("--out", out_dir, "Output directory");
  detail::add_schema_flags(pre, id_col, text_col, toxic_col, engaging_col, fact_col, delimiter);

  // split
  auto* split = app.add_subcommand("split", "Create a deterministic cross-validation fold plan");
  std::string split_input;
  int split_k = 5;
  double split_fraction = 0.1;
  split->add_option("--input", split_input, "Cleaned dataset file")->required();
  split->add_option("--k", split_k, "Number of folds");
  split->add_option("--fraction", split_fraction, "Early-stopping fraction of the training folds");
  split->add_option("--seed", seed, "Shuffle seed");
  split->add_option("--out", out_dir, "Output directory");
  detail::add_schema_flags(split, id_col, text_col, toxic_col, engaging_col, fact_col, delimiter);

  // train-pool
  auto* tp = app.add_subcommand("train-pool", "Train a pool of baseline models per fold");
  std::string tp_input, tp_folds, tp_head = "multi", tp_group = "default";
  std::size_t tp_count = 1, tp_threads = 0;
  TrainConfig tp_train;
  FeaturizerConfig tp_feat;
  tp->add_option("--input", tp_input, "Cleaned dataset file")->required();
  tp->add_option("--folds", tp_folds, "Fold plan file")->required();
  tp->add_option("--head", tp_head, "Classifier head: multi (3-output) or single (2-output x 3 tasks)");
  tp->add_option("--count", tp_count, "Members per fold");
  tp->add_option("--group", tp_group, "Composition tag recorded for every member");
  tp->add_option("--batch-size", tp_train.batch_size, "Mini-batch size");
  tp->add_option("--epochs", tp_train.epochs, "Training epochs");
  tp->add_option("--learning-rate", tp_train.learning_rate,
                 "Peak learning rate (0.05 linear-model default; 5e-6 is the fine-tuning value)");
  tp->add_option("--warmup", tp_train.warmup_fraction, "Linear warmup fraction of total updates");
  tp->add_option("--eval-every", tp_train.eval_every_updates, "Updates between early-stop evaluations");
  tp->add_option("--patience", tp_train.patience_evals, "Non-improving evaluations before stopping");
  tp->add_option("--weight-decay", tp_train.adamw.weight_decay, "Decoupled weight decay");
  std::string tp_schedule = "constant";
  tp->add_option("--schedule", tp_schedule, "Post-warmup schedule: constant or linear-decay");
  tp->add_option("--ngram-min", tp_feat.n_min, "Smallest character n-gram");
  tp->add_option("--ngram-max", tp_feat.n_max, "Largest character n-gram");
  tp->add_option("--buckets", tp_feat.buckets, "Feature hash buckets");
  tp->add_option("--seed", seed, "Master seed for the whole pool");
  tp->add_option("--threads", tp_threads, "Worker threads (0 = all cores)");
  tp->add_option("--out", out_dir, "Pool output directory");
  detail::add_schema_flags(tp, id_col, text_col, toxic_col, engaging_col, fact_col, delimiter);

  // predict
  auto* pr = app.add_subcommand("predict", "Write a probability table for one model snapshot");
  std::string pr_model, pr_input, pr_model_id;
  bool pr_preprocess = false;
  pr->add_option("--model", pr_model, "Model snapshot (.gem)")->required();
  pr->add_option("--input", pr_input, "Dataset file (cleaned unless --preprocess)")->required();
  pr->add_option("--model-id", pr_model_id, "Model id column value (default: snapshot stem)");
  pr->add_flag("--preprocess", pr_preprocess, "Apply dedup + text cleaning before predicting");
  pr->add_option("--out", out_dir, "Output directory");
  detail::add_schema_flags(pr, id_col, text_col, toxic_col, engaging_col, fact_col, delimiter);

  // ensemble-eval
  auto* ev = app.add_subcommand("ensemble-eval",
                                "Soft-vote member probability tables and score predictions");
  EnsembleEvalOptions ev_opt;
  std::string ev_criterion = "macro", ev_aggregation = "per-member-scores", ev_thresholds;
  ev->add_option("--tables", ev_opt.tables, "Member probability tables");
  ev->add_option("--calibration-tables", ev_opt.calibration_tables,
                 "Members' early-stopping tables for threshold calibration");
  ev->add_option("--pool", ev_opt.pool_dir, "Evaluate a trained pool per fold instead of tables");
  ev->add_option("--folds", ev_opt.folds_path, "Fold plan (pool mode)");
  ev->add_option("--gold", ev_opt.gold_path, "Labeled dataset to score against");
  ev->add_option("--calibration-gold", ev_opt.calibration_gold,
                 "Labels for the calibration tables (default: --gold)");
  ev->add_option("--thresholds", ev_thresholds, "Fixed thresholds t_toxic,t_engaging,t_fact");
  ev->add_option("--criterion", ev_criterion, "Calibration criterion: per-class or macro");
  ev->add_option("--aggregation", ev_aggregation,
                 "per-member-scores or averaged-probabilities");
  ev->add_option("--grid-step", ev_opt.threshold.grid_step, "Threshold grid step");
  ev->add_option("--out", out_dir, "Output directory");
  detail::add_schema_flags(ev, id_col, text_col, toxic_col, engaging_col, fact_col, delimiter);

  // bootstrap
  auto* bs = app.add_subcommand("bootstrap", "Ensemble-size experiment over a trained pool");
  std::vector<std::string> bs_pools;
  std::string bs_gold, bs_sizes, bs_composition, bs_threshold_mode = "calibrated";
  BootstrapConfig bs_cfg;
  bool bs_dump = false;
  bs->add_option("--pool", bs_pools, "Pool directory (repeat to mix groups)")->required();
  bs->add_option("--gold", bs_gold, "Labeled dataset covering the validation folds")->required();
  bs->add_option("--sizes", bs_sizes, "Comma-separated ensemble sizes (default ladder)");
  bs->add_option("--samples", bs_cfg.samples_per_size, "Ensembles drawn per size");
  bs->add_option("--seed", seed, "Sampling seed");
  bs->add_option("--composition", bs_composition,
                 "group=weight,... sampling mix (default: whole pool)");
  bs->add_option("--threshold-mode", bs_threshold_mode, "calibrated or fixed (0.5)");
  bs->add_option("--grid-step", bs_cfg.threshold.grid_step, "Threshold grid step");
  bs->add_option("--threads", bs_cfg.threads, "Worker threads (0 = all cores)");
  bs->add_flag("--dump-samples", bs_dump, "Also write every draw's macro-F1");
  bs->add_option("--out", out_dir, "Output directory");
  detail::add_schema_flags(bs, id_col, text_col, toxic_col, engaging_col, fact_col, delimiter);

  // plot
  auto* pl = app.add_subcommand("plot", "Render bootstrap summaries as an SVG line chart");
  std::vector<std::string> pl_summaries;
  std::string pl_band, pl_title;
  pl->add_option("--summary", pl_summaries, "Summary file, or label=path")->required();
  pl->add_option("--band", pl_band, "Series label that gets the std band (default: first)");
  pl->add_option("--title", pl_title, "Chart title");
  pl->add_option("--out", out_dir, "Output directory");
  detail::add_schema_flags(pl, id_col, text_col, toxic_col, engaging_col, fact_col, delimiter);

  std::vector<const char*> argv;
  argv.push_back("germeval");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const DatasetSchema schema =
        detail::schema_from(id_col, text_col, toxic_col, engaging_col, fact_col, delimiter);
    // The parsed flag values double as the replay configuration.
    const auto echo = [&](std::initializer_list<std::pair<std::string, nlohmann::json>> extra) {
      nlohmann::json j{{"id_column", id_col},      {"text_column", text_col},
                       {"toxic_column", toxic_col}, {"engaging_column", engaging_col},
                       {"fact_column", fact_col},   {"delimiter", delimiter}};
      for (const auto& [k, v] : extra) j[k] = v;
      return j;
    };

    if (*pre) {
      return cmd_preprocess(pre_input, schema, pre_max_tokens, out_dir,
                            echo({{"command", "preprocess"},
                                  {"input", pre_input},
                                  {"max_tokens", pre_max_tokens}}));
    }
    if (*split) {
      return cmd_split(split_input, schema, split_k, split_fraction, seed, out_dir,
                       echo({{"command", "split"},
                             {"input", split_input},
                             {"k", split_k},
                             {"fraction", split_fraction},
                             {"seed", seed}}));
    }
    if (*tp) {
      tp_train.schedule = tp_schedule == "linear-decay" ? LrSchedule::kWarmupLinearDecay
                                                        : LrSchedule::kWarmupConstant;
      PoolTrainOptions opts;
      opts.count = tp_count;
      opts.head = detail::parse_head(tp_head);
      opts.group = tp_group;
      opts.master_seed = seed;
      opts.threads = tp_threads;
      return cmd_train_pool(
          tp_input, schema, tp_folds, tp_train, tp_feat, opts, out_dir,
          echo({{"command", "train-pool"},
                {"input", tp_input},
                {"folds", tp_folds},
                {"head", tp_head},
                {"count", tp_count},
                {"group", tp_group},
                {"batch_size", tp_train.batch_size},
                {"epochs", tp_train.epochs},
                {"learning_rate", tp_train.learning_rate},
                {"warmup_fraction", tp_train.warmup_fraction},
                {"eval_every_updates", tp_train.eval_every_updates},
                {"patience_evals", tp_train.patience_evals},
                {"weight_decay", tp_train.adamw.weight_decay},
                {"schedule", tp_schedule},
                {"ngram_min", tp_feat.n_min},
                {"ngram_max", tp_feat.n_max},
                {"buckets", tp_feat.buckets},
                {"seed", seed}}));
    }
    if (*pr) {
      return cmd_predict(pr_model, pr_input, schema, pr_model_id, pr_preprocess, out_dir,
                         echo({{"command", "predict"},
                               {"model", pr_model},
                               {"input", pr_input},
                               {"model_id", pr_model_id},
                               {"preprocess", pr_preprocess}}));
    }
    if (*ev) {
      ev_opt.threshold.criterion = ev_criterion == "per-class" ? ThresholdCriterion::kPerClass
                                                               : ThresholdCriterion::kMacro;
      ev_opt.threshold.aggregation = ev_aggregation == "averaged-probabilities"
                                         ? ThresholdAggregation::kAveragedProbabilities
                                         : ThresholdAggregation::kPerMemberScores;
      if (!ev_thresholds.empty()) {
        const auto parts = detail::parse_composition(ev_thresholds);
        if (parts.size() != kNumTasks) {
          throw ConfigError("--thresholds expects exactly three comma-separated values");
        }
        std::array<double, kNumTasks> t{};
        for (std::size_t c = 0; c < kNumTasks; ++c) t[c] = std::stod(parts[c].first);
        ev_opt.fixed_thresholds = t;
      }
      return cmd_ensemble_eval(ev_opt, schema, out_dir,
                               echo({{"command", "ensemble-eval"},
                                     {"tables", ev_opt.tables},
                                     {"calibration_tables", ev_opt.calibration_tables},
                                     {"pool", ev_opt.pool_dir},
                                     {"folds", ev_opt.folds_path},
                                     {"gold", ev_opt.gold_path},
                                     {"criterion", ev_criterion},
                                     {"aggregation", ev_aggregation},
                                     {"grid_step", ev_opt.threshold.grid_step},
                                     {"thresholds", ev_thresholds}}));
    }
    if (*bs) {
      bs_cfg.seed = seed;
      bs_cfg.composition = detail::parse_composition(bs_composition);
      bs_cfg.threshold_mode = bs_threshold_mode == "fixed" ? BootstrapThresholdMode::kFixedHalf
                                                           : BootstrapThresholdMode::kCalibratedPerDraw;
      if (!bs_sizes.empty()) {
        for (const auto& [value, _] : detail::parse_composition(bs_sizes)) {
          bs_cfg.sizes.push_back(static_cast<std::size_t>(std::stoull(value)));
        }
      }
      return cmd_bootstrap(bs_pools, bs_gold, schema, bs_cfg, bs_dump, out_dir,
                           echo({{"command", "bootstrap"},
                                 {"pools", bs_pools},
                                 {"gold", bs_gold},
                                 {"sizes", bs_sizes},
                                 {"samples", bs_cfg.samples_per_size},
                                 {"seed", seed},
                                 {"composition", bs_composition},
                                 {"threshold_mode", bs_threshold_mode},
                                 {"grid_step", bs_cfg.threshold.grid_step}}));
    }
    if (*pl) {
      return cmd_plot(pl_summaries, pl_band, pl_title, schema, out_dir,
                      echo({{"command", "plot"},
                            {"summaries", pl_summaries},
                            {"band", pl_band},
                            {"title", pl_title}}));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace germeval::cli
