// Acceptance suite: runs every documented criterion at its stated tolerance
// and prints one PASS/FAIL line each. Exit status is the number of failures.
//
// Usage: acceptance <synthetic_corpus.csv>
// Optional environment:
//   GERMEVAL_TRAIN_CSV / GERMEVAL_TEST_CSV  official shared-task files for
//   the deduplication criterion (skipped with a note when absent).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "germeval/bootstrap.hpp"
#include "germeval/cli.hpp"
#include "germeval/csv.hpp"
#include "germeval/dataset.hpp"
#include "germeval/ensemble.hpp"
#include "germeval/folds.hpp"
#include "germeval/metrics.hpp"
#include "germeval/model.hpp"
#include "germeval/prob_table.hpp"
#include "germeval/rng.hpp"
#include "germeval/train.hpp"

using namespace germeval;
namespace fs = std::filesystem;

namespace {

int failures = 0;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void report(int criterion, bool ok, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void report_skip(int criterion, const std::string& detail) {
  std::printf("SKIP criterion %d: %s\n", criterion, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Independent from-definition score: per-class precision/recall averaged over
// positive and negative class, harmonic mean; error-free predictions score 1;
// zero denominators contribute 0.
double oracle_f1(double tp, double fp, double fn, double tn) {
  if (fp == 0.0 && fn == 0.0) return tp + tn > 0.0 ? 1.0 : 0.0;
  const auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
  const double p = (ratio(tp, tp + fp) + ratio(tn, tn + fn)) / 2.0;
  const double r = (ratio(tp, tp + fn) + ratio(tn, tn + fp)) / 2.0;
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

// --- criterion 1: metric oracle equivalence ---------------------------------

void criterion_1() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(1001);
  bool ok = true;
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    const ConfusionMatrix m{rng.next_below(50), rng.next_below(50), rng.next_below(50),
                            rng.next_below(50)};
    if (m.total() == 0) continue;
    const double expected = oracle_f1(static_cast<double>(m.tp), static_cast<double>(m.fp),
                                      static_cast<double>(m.fn), static_cast<double>(m.tn));
    if (std::abs(germeval_f1(m) - expected) > 1e-12) ok = false;
    const ConfusionMatrix swapped{m.tn, m.fn, m.fp, m.tp};
    if (germeval_f1(m) != germeval_f1(swapped)) ok = false;
  }
  const double elapsed = seconds_since(start);
  ok = ok && elapsed < 1.0;
  report(1, ok,
         "germeval_f1 vs independent oracle on 1000 random matrices (1e-12) and exact "
         "label-swap invariance, " +
             fmt(elapsed) + "s");
}

// --- criterion 2: reported-score arithmetic ----------------------------------

void criterion_2() {
  const std::string a = format_score(macro_f1({0.716, 0.699, 0.763}));
  const std::string b = format_score(macro_f1({0.717, 0.697, 0.768}));
  report(2, a == "0.726" && b == "0.727",
         "macro of (0.716, 0.699, 0.763) displays 0.726 and (0.717, 0.697, 0.768) displays "
         "0.727 (got " + a + ", " + b + ")");
}

// --- criterion 3: official-data deduplication (conditional) -----------------

void criterion_3() {
  const char* train_path = std::getenv("GERMEVAL_TRAIN_CSV");
  if (train_path == nullptr || !fs::exists(train_path)) {
    report_skip(3,
                "official training file not supplied (set GERMEVAL_TRAIN_CSV); dedup target "
                "3244 -> 3226 not checked");
    return;
  }
  const Dataset raw = load_dataset(train_path);
  const Dataset deduped = deduplicate(raw);
  PreprocessStats stats;
  stats.input_rows = raw.size();
  preprocess_dataset(deduped, text::kDefaultMaxTokens, &stats);
  std::string detail = "official train " + std::to_string(raw.size()) + " -> " +
                       std::to_string(deduped.size()) + " after dedup; truncation-affected " +
                       std::to_string(stats.truncation_affected) +
                       " (paper reports 49 with its subword tokenizer; informational)";
  const char* test_path = std::getenv("GERMEVAL_TEST_CSV");
  if (test_path != nullptr && fs::exists(test_path)) {
    PreprocessStats test_stats;
    preprocess_dataset(load_dataset(test_path), text::kDefaultMaxTokens, &test_stats);
    detail += "; test truncation-affected " + std::to_string(test_stats.truncation_affected) +
              " (paper: 21; informational)";
  }
  report(3, raw.size() == 3244 && deduped.size() == 3226, detail);
}

// --- criterion 4: threshold-selection optimality ------------------------------

void criterion_4() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(1004);
  const std::vector<double> grid = threshold_grid(0.025);
  bool ok = grid.size() == 41;
  for (int trial = 0; trial < 100 && ok; ++trial) {
    const std::size_t n = 3 + rng.next_below(25);
    ProbabilityTable t;
    t.model_id = "m";
    t.head = HeadKind::kMultiLabel;
    GoldLookup gold;
    for (std::size_t i = 0; i < n; ++i) {
      t.sample_ids.push_back(static_cast<std::int64_t>(i));
      t.probs.push_back({rng.next_double(), rng.next_double(), rng.next_double()});
      gold[static_cast<std::int64_t>(i)] = {rng.next_below(2) == 1, rng.next_below(2) == 1,
                                            rng.next_below(2) == 1};
    }
    const Thresholds th = select_thresholds({&t}, gold);
    for (std::size_t c = 0; c < kNumTasks && ok; ++c) {
      const auto f1_at = [&](double cut) {
        ConfusionMatrix m;
        for (std::size_t i = 0; i < n; ++i) {
          const bool pred = t.probs[i][c] >= cut;
          const bool truth = gold[t.sample_ids[i]][c];
          if (truth && pred) ++m.tp;
          else if (!truth && pred) ++m.fp;
          else if (truth && !pred) ++m.fn;
          else ++m.tn;
        }
        return germeval_f1(m);
      };
      double best = -1.0;
      for (double g : grid) best = std::max(best, f1_at(g));
      if (f1_at(th.t[c]) != best) ok = false;
    }
  }
  const double elapsed = seconds_since(start);
  ok = ok && elapsed < 5.0;
  report(4, ok,
         "selected grid threshold attains the exhaustive 41-point maximum on 100 random "
         "instances, " + fmt(elapsed) + "s");
}

// --- criterion 5: gradient correctness ----------------------------------------

void criterion_5() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(1005);
  FeaturizerConfig cfg;
  cfg.n_min = 2;
  cfg.n_max = 3;
  cfg.buckets = 24;
  bool ok = true;
  double worst = 0.0;
  for (int trial = 0; trial < 50 && ok; ++trial) {
    const HeadKind head = trial % 2 == 0 ? HeadKind::kMultiLabel : HeadKind::kSingleLabel;
    LinearModel m = make_model(head, static_cast<Task>(trial % 3), cfg, rng.next_u64());
    for (double& w : m.weights) w = rng.next_double(-0.6, 0.6);
    for (double& b : m.bias) b = rng.next_double(-0.3, 0.3);

    std::vector<FeatureVector> xs;
    std::vector<LabelTriple> gold;
    const std::size_t batch = 1 + rng.next_below(6);
    for (std::size_t i = 0; i < batch; ++i) {
      FeatureVector x;
      x.buckets = cfg.buckets;
      for (std::uint32_t bucket = 0; bucket < cfg.buckets; ++bucket) {
        if (rng.next_below(3) == 0) {
          x.entries.emplace_back(bucket, 1 + static_cast<std::uint32_t>(rng.next_below(3)));
        }
      }
      xs.push_back(x);
      gold.push_back({rng.next_below(2) == 1, rng.next_below(2) == 1, rng.next_below(2) == 1});
    }
    std::vector<const FeatureVector*> ptrs;
    for (const auto& x : xs) ptrs.push_back(&x);

    Gradient analytic;
    loss_and_gradient(m, ptrs, gold, analytic);
    Gradient scratch;
    const double h = 1e-4;
    const auto check = [&](double& param, double grad_value) {
      const double saved = param;
      param = saved + h;
      const double up = loss_and_gradient(m, ptrs, gold, scratch);
      param = saved - h;
      const double down = loss_and_gradient(m, ptrs, gold, scratch);
      param = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double scale = std::max({1e-6, std::abs(numeric), std::abs(grad_value)});
      const double rel = std::abs(numeric - grad_value) / scale;
      worst = std::max(worst, rel);
      if (rel >= 1e-5) ok = false;
    };
    for (std::size_t i = 0; i < m.weights.size() && ok; ++i) check(m.weights[i], analytic.weights[i]);
    for (std::size_t i = 0; i < m.bias.size() && ok; ++i) check(m.bias[i], analytic.bias[i]);
  }
  const double elapsed = seconds_since(start);
  ok = ok && elapsed < 10.0;
  report(5, ok,
         "analytic gradients of both losses vs central differences on 50 random models, worst "
         "relative error " + fmt(worst) + ", " + fmt(elapsed) + "s");
}

// --- criterion 6: ensemble identities -----------------------------------------

void criterion_6() {
  Rng rng(1006);
  bool ok = true;

  // soft_vote of duplicated members equals the single member exactly.
  for (int trial = 0; trial < 50 && ok; ++trial) {
    ProbabilityTable t;
    t.model_id = "m";
    t.head = HeadKind::kMultiLabel;
    for (int i = 0; i < 20; ++i) {
      t.sample_ids.push_back(i);
      t.probs.push_back({rng.next_double(), rng.next_double(), rng.next_double()});
    }
    const std::size_t copies = 2 + rng.next_below(6);
    std::vector<const ProbabilityTable*> dup(copies, &t);
    const ProbabilityTable avg = soft_vote(dup);
    for (std::size_t i = 0; i < t.size() && ok; ++i) {
      for (std::size_t c = 0; c < kNumTasks; ++c) {
        if (avg.probs[i][c] != t.probs[i][c]) ok = false;
      }
    }
  }

  // Single-label argmax equals the p >= 0.5 rule, exactly, on 1000 tables.
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    std::vector<ProbabilityTable> members;
    const std::size_t count = 1 + rng.next_below(7);
    std::vector<std::int64_t> ids;
    for (int i = 0; i < 10; ++i) ids.push_back(i);
    for (std::size_t m = 0; m < count; ++m) {
      ProbabilityTable t;
      t.model_id = "s" + std::to_string(m);
      t.head = HeadKind::kSingleLabel;
      t.task = Task::kToxic;
      t.sample_ids = ids;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        std::array<double, 3> row = {rng.next_double(), std::nan(""), std::nan("")};
        t.probs.push_back(row);
      }
      members.push_back(std::move(t));
    }
    std::vector<const ProbabilityTable*> ptrs;
    for (const auto& m : members) ptrs.push_back(&m);
    const ProbabilityTable avg = soft_vote(ptrs);
    for (std::size_t i = 0; i < ids.size() && ok; ++i) {
      const double p_pos = avg.probs[i][0];
      const double p_neg = 1.0 - p_pos;
      if ((p_pos >= p_neg) != (p_pos >= 0.5)) ok = false;
    }
  }
  report(6, ok,
         "duplicated-member soft vote is exact; single-label argmax == (p >= 0.5) on 1000 "
         "random tables");
}

// --- criteria 7-10 share the synthetic corpus pipeline -----------------------

struct PipelineArtifacts {
  Dataset clean;
  FoldPlan plan;
  FeaturizedDataset data;
  TrainedPool pool;
  GoldLookup gold;
};

PipelineArtifacts build_pool(const std::string& corpus_path, std::size_t count,
                             std::uint64_t master_seed, std::uint64_t buckets) {
  PipelineArtifacts a;
  PreprocessStats stats;
  a.clean = preprocess_dataset(deduplicate(load_dataset(corpus_path)),
                               text::kDefaultMaxTokens, &stats);
  a.plan = make_fold_plan(a.clean, 5, 0.1, master_seed);
  FeaturizerConfig feat;
  feat.n_min = 2;
  feat.n_max = 4;
  feat.buckets = buckets;
  a.data = featurize_dataset(a.clean, feat);
  TrainConfig train_cfg;  // batch 24, 10 epochs, warmup 0.3, eval 40, patience 2
  PoolTrainOptions opts;
  opts.count = count;
  opts.head = HeadKind::kMultiLabel;
  opts.master_seed = master_seed;
  a.pool = train_pool(a.data, a.plan, train_cfg, opts);
  a.gold = make_gold_lookup(a.clean);
  return a;
}

void criteria_7_and_8(const std::string& corpus_path) {
  // Criterion 8 first: exactness on a tiny pool.
  {
    const auto start = std::chrono::steady_clock::now();
    PipelineArtifacts a = build_pool(corpus_path, 3, 11, 1 << 12);
    double exact_mean = 0.0;
    double exact_sq = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        EnsembleSpec spec;
        spec.member_indices = {i, j};
        const double score = ensemble_fold_mean_macro(a.pool, spec, a.gold);
        exact_mean += score / 9.0;
        exact_sq += score * score / 9.0;
      }
    }
    const double exact_var = std::max(0.0, exact_sq - exact_mean * exact_mean);

    BootstrapConfig cfg;
    cfg.sizes = {2};
    cfg.samples_per_size = 1000;
    cfg.seed = 12;
    const BootstrapSummary summary = run_bootstrap(a.pool, a.gold, cfg);
    const double se = std::sqrt(exact_var / 1000.0);
    const double diff = std::abs(summary.per_size[0].mean - exact_mean);
    const double elapsed = seconds_since(start);
    report(8, diff <= 3.0 * se + 1e-12 && elapsed < 60.0,
           "3-model pool, size 2: |empirical mean - exact enumeration mean| = " + fmt(diff) +
               " <= 3 SE = " + fmt(3.0 * se) + ", " + fmt(elapsed) + "s");
  }

  // Criterion 7: the desk-scale ensemble-size experiment.
  {
    const auto start = std::chrono::steady_clock::now();
    PipelineArtifacts a = build_pool(corpus_path, 30, 7, 1 << 14);
    BootstrapConfig cfg;
    cfg.sizes = {1, 2, 5, 10, 15, 30};
    cfg.samples_per_size = 1000;
    cfg.seed = 7;
    const BootstrapSummary summary = run_bootstrap(a.pool, a.gold, cfg);
    const auto& by_size = summary.per_size;
    const double std2 = by_size[1].std_dev;
    const double std30 = by_size[5].std_dev;
    const double mean1 = by_size[0].mean;
    const double mean15 = by_size[4].mean;
    const double elapsed = seconds_since(start);
    std::string curve;
    for (const auto& s : by_size) {
      curve += " " + std::to_string(s.size) + ":" + format_score(s.mean) + "/" +
               fmt(s.std_dev);
    }
    const bool ok = std30 < std2 && mean15 >= mean1 - 0.002 && elapsed < 600.0;
    report(7, ok,
           "30 models x 5 folds, 1000 draws per size {1,2,5,10,15,30}: std(30)=" + fmt(std30) +
               " < std(2)=" + fmt(std2) + ", mean(15)=" + fmt(mean15) +
               " >= mean(1)-0.002=" + fmt(mean1 - 0.002) + ", " + fmt(elapsed) +
               "s; size:mean/std =" + curve);
  }
}

// --- criterion 9: end-to-end determinism --------------------------------------

std::string slurp(const std::string& path) { return csv::read_file(path); }

bool run_pipeline(const std::string& corpus, const std::string& base) {
  const auto run = [](std::vector<std::string> args) { return cli::run(std::move(args)) == 0; };
  const std::string pre = base + "/pre", split = base + "/split", pool = base + "/pool",
                    predict = base + "/predict", eval = base + "/eval", bs = base + "/bs",
                    plot = base + "/plot";
  return run({"preprocess", "--input", corpus, "--out", pre}) &&
         run({"split", "--input", pre + "/dataset.csv", "--k", "3", "--seed", "42", "--out",
              split}) &&
         run({"train-pool", "--input", pre + "/dataset.csv", "--folds", split + "/folds.json",
              "--count", "2", "--epochs", "2", "--buckets", "4096", "--ngram-max", "3", "--seed",
              "42", "--out", pool}) &&
         run({"predict", "--model", pool + "/models/f0_m000.gem", "--input",
              pre + "/dataset.csv", "--out", predict}) &&
         run({"ensemble-eval", "--tables", pool + "/tables/f0_m000.val.csv", "--tables",
              pool + "/tables/f0_m001.val.csv", "--calibration-tables",
              pool + "/tables/f0_m000.es.csv", "--calibration-tables",
              pool + "/tables/f0_m001.es.csv", "--gold", pre + "/dataset.csv", "--out", eval}) &&
         run({"bootstrap", "--pool", pool, "--gold", pre + "/dataset.csv", "--sizes", "1,2,4",
              "--samples", "100", "--seed", "42", "--out", bs}) &&
         run({"plot", "--summary", bs + "/bootstrap_summary.csv", "--out", plot});
}

void criterion_9(const std::string& corpus_path, const fs::path& work) {
  const std::string run_a = (work / "run_a").string();
  const std::string run_b = (work / "run_b").string();
  bool ok = run_pipeline(corpus_path, run_a) && run_pipeline(corpus_path, run_b);
  std::string mismatch;
  if (ok) {
    const std::vector<std::string> artifacts = {
        "pre/dataset.csv",       "split/folds.json",
        "pool/tables/f0_m000.val.csv", "pool/tables/f1_m001.es.csv",
        "pool/models/f0_m001.gem",     "predict/f0_m000.probs.csv",
        "eval/predictions.csv",  "eval/eval_report.csv", "eval/eval_report.json",
        "bs/bootstrap_summary.csv",    "plot/figure.svg"};
    for (const std::string& artifact : artifacts) {
      if (slurp(run_a + "/" + artifact) != slurp(run_b + "/" + artifact)) {
        ok = false;
        mismatch = artifact;
        break;
      }
    }
  }
  report(9, ok,
         ok ? "two full pipeline runs with one master seed are byte-identical across dataset, "
              "folds, tables, models, predictions, summary and SVG (manifest timestamps excluded)"
            : "pipeline runs differ" + (mismatch.empty() ? "" : " at " + mismatch));
}

// --- criterion 10: ingestion round-trip ----------------------------------------

void criterion_10(const fs::path& work) {
  // In-memory path.
  const std::string base = (work / "run_a").string();
  const std::string dataset_path = base + "/pre/dataset.csv";
  const std::string model_path = base + "/pool/models/f0_m000.gem";
  const Dataset dataset = load_dataset(dataset_path);
  const LinearModel model = load_model(model_path);

  std::vector<std::int64_t> ids;
  std::vector<FeatureVector> feats;
  for (const Comment& c : dataset.comments) {
    ids.push_back(c.id);
    feats.push_back(featurize(c.text, model.featurizer));
  }
  std::vector<const FeatureVector*> ptrs;
  for (const auto& f : feats) ptrs.push_back(&f);
  const ProbabilityTable in_memory = predict_proba(model, ids, ptrs, "f0_m000");

  Thresholds fixed;
  fixed.t = {0.5, 0.5, 0.5};
  const auto pred_memory = predict_multilabel(in_memory, fixed);
  std::vector<LabelTriple> gold_labels;
  for (const Comment& c : dataset.comments) gold_labels.push_back(*c.labels);
  const EvalReport memory_report = evaluate(gold_labels, pred_memory);

  // File path: the table written by `predict` in criterion 9, re-read by
  // ensemble-eval with the same fixed thresholds.
  const std::string eval_dir = (work / "roundtrip_eval").string();
  bool ok = cli::run({"ensemble-eval", "--tables", base + "/predict/f0_m000.probs.csv",
                      "--thresholds", "0.5,0.5,0.5", "--gold", dataset_path, "--out",
                      eval_dir}) == 0;
  if (ok) {
    const std::vector<csv::Row> rows = csv::parse(slurp(eval_dir + "/eval_report.csv"));
    ok = rows.size() >= 2 && rows[1].fields.size() == 4;
    if (ok) {
      const double macro = parse_double(rows[1].fields[0], 2);
      ok = macro == memory_report.macro;
      for (std::size_t c = 0; c < kNumTasks && ok; ++c) {
        ok = parse_double(rows[1].fields[1 + c], 2) == memory_report.f1[c];
      }
    }
  }
  report(10, ok,
         "probability table written by `predict`, re-read by `ensemble-eval`, reproduces the "
         "in-memory EvalReport bit for bit (macro " + format_score(memory_report.macro) + ")");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <synthetic_corpus.csv>\n");
    return 2;
  }
  const std::string corpus_path = argv[1];
  const fs::path work =
      fs::temp_directory_path() / ("germeval_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(work);

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criteria_7_and_8(corpus_path);
  criterion_9(corpus_path, work);
  criterion_10(work);

  fs::remove_all(work);
  if (failures == 0) {
    std::printf("acceptance: all criteria passed\n");
  } else {
    std::printf("acceptance: %d criterion(s) FAILED\n", failures);
  }
  return failures;
}
