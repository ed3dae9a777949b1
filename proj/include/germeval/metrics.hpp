#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "germeval/dataset.hpp"
#include "germeval/errors.hpp"
#include "germeval/format.hpp"

namespace germeval {

struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
};

inline ConfusionMatrix confusion(const std::vector<bool>& gold, const std::vector<bool>& pred) {
  if (gold.size() != pred.size()) {
    throw ContractError("confusion: gold has " + std::to_string(gold.size()) +
                        " entries, pred has " + std::to_string(pred.size()));
  }
  if (gold.empty()) throw ContractError("confusion: empty inputs");
  ConfusionMatrix m;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] && pred[i]) ++m.tp;
    else if (!gold[i] && pred[i]) ++m.fp;
    else if (gold[i] && !pred[i]) ++m.fn;
    else ++m.tn;
  }
  return m;
}

namespace detail {
/// Ratio with the zero-denominator-contributes-zero convention.
inline double safe_ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace detail

/// The GermEval shared-task F1: precision and recall are computed for the
/// positive and the negative class, averaged over the two classes, and the
/// F1 is the harmonic mean of averaged precision and averaged recall. This
/// is not the usual macro average of per-class F1 scores.
///
/// Degenerate counts: error-free predictions score 1 even when one class is
/// absent from the data; otherwise a precision or recall with denominator 0
/// contributes 0, and an all-zero average yields 0.
inline double germeval_f1(const ConfusionMatrix& m) {
  if (m.fp == 0 && m.fn == 0) return m.total() > 0 ? 1.0 : 0.0;
  const double p_pos = detail::safe_ratio(m.tp, m.tp + m.fp);
  const double r_pos = detail::safe_ratio(m.tp, m.tp + m.fn);
  const double p_neg = detail::safe_ratio(m.tn, m.tn + m.fn);
  const double r_neg = detail::safe_ratio(m.tn, m.tn + m.fp);
  const double p_avg = 0.5 * (p_pos + p_neg);
  const double r_avg = 0.5 * (r_pos + r_neg);
  if (p_avg + r_avg == 0.0) return 0.0;
  return 2.0 * p_avg * r_avg / (p_avg + r_avg);
}

inline double macro_f1(const std::array<double, kNumTasks>& f1s) {
  return (f1s[0] + f1s[1] + f1s[2]) / 3.0;
}

struct EvalReport {
  std::array<double, kNumTasks> f1 = {0.0, 0.0, 0.0};  // toxic, engaging, fact
  double macro = 0.0;
  std::array<ConfusionMatrix, kNumTasks> confusions;

  double f1_toxic() const { return f1[0]; }
  double f1_engaging() const { return f1[1]; }
  double f1_fact() const { return f1[2]; }
};

inline EvalReport evaluate(const std::vector<LabelTriple>& gold,
                           const std::vector<LabelTriple>& pred) {
  if (gold.size() != pred.size()) {
    throw ContractError("evaluate: gold has " + std::to_string(gold.size()) +
                        " entries, pred has " + std::to_string(pred.size()));
  }
  if (gold.empty()) throw ContractError("evaluate: empty inputs");
  EvalReport report;
  for (std::size_t t = 0; t < kNumTasks; ++t) {
    std::vector<bool> g(gold.size()), p(pred.size());
    for (std::size_t i = 0; i < gold.size(); ++i) {
      g[i] = gold[i][t];
      p[i] = pred[i][t];
    }
    report.confusions[t] = confusion(g, p);
    report.f1[t] = germeval_f1(report.confusions[t]);
  }
  report.macro = macro_f1(report.f1);
  return report;
}

/// One-row record mirroring the score table column order.
inline std::string eval_report_csv(const EvalReport& r, char delimiter = ',') {
  std::string out = "macro_f1";
  out += delimiter;
  out += "f1_toxic";
  out += delimiter;
  out += "f1_engaging";
  out += delimiter;
  out += "f1_fact\n";
  out += format_full(r.macro);
  for (std::size_t t = 0; t < kNumTasks; ++t) {
    out += delimiter;
    out += format_full(r.f1[t]);
  }
  out += '\n';
  return out;
}

inline nlohmann::json eval_report_to_json(const EvalReport& r) {
  nlohmann::json per_class = nlohmann::json::object();
  for (std::size_t t = 0; t < kNumTasks; ++t) {
    const ConfusionMatrix& m = r.confusions[t];
    per_class[task_name(static_cast<Task>(t))] = {
        {"f1", r.f1[t]}, {"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn}};
  }
  return nlohmann::json{{"macro_f1", r.macro},
                        {"f1_toxic", r.f1[0]},
                        {"f1_engaging", r.f1[1]},
                        {"f1_fact", r.f1[2]},
                        {"per_class", per_class}};
}

}  // namespace germeval
