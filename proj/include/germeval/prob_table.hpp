#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "germeval/csv.hpp"
#include "germeval/dataset.hpp"
#include "germeval/errors.hpp"
#include "germeval/format.hpp"
#include "germeval/model.hpp"

namespace germeval {

/// Per-model class probabilities, the interchange unit between training,
/// external-model ingestion, ensembling, and the bootstrap experiment.
/// Multi-label rows carry all three probabilities; single-label rows carry
/// only the bound task's positive probability (the negative one is implied).
struct ProbabilityTable {
  std::string model_id;
  HeadKind head = HeadKind::kMultiLabel;
  Task task = Task::kToxic;  // single-label only
  std::vector<std::int64_t> sample_ids;
  std::vector<std::array<double, kNumTasks>> probs;  // unused slots are NaN

  std::size_t size() const { return sample_ids.size(); }

  double positive_prob(std::size_t row) const {
    return head == HeadKind::kSingleLabel ? probs[row][static_cast<std::size_t>(task)]
                                          : throw ContractError("positive_prob on multi-label table");
  }
};

inline ProbabilityTable predict_proba(const LinearModel& m,
                                      const std::vector<std::int64_t>& sample_ids,
                                      const std::vector<const FeatureVector*>& features,
                                      std::string model_id) {
  if (sample_ids.size() != features.size()) {
    throw ContractError("predict_proba: ids and features sizes differ");
  }
  ProbabilityTable t;
  t.model_id = std::move(model_id);
  t.head = m.head;
  t.task = m.task;
  t.sample_ids = sample_ids;
  t.probs.reserve(features.size());
  const double nan = std::nan("");
  for (const FeatureVector* x : features) {
    const std::array<double, kNumTasks> p = predict_one(m, *x);
    if (m.head == HeadKind::kSingleLabel) {
      std::array<double, kNumTasks> row = {nan, nan, nan};
      row[static_cast<std::size_t>(m.task)] = p[1];  // positive-class probability
      t.probs.push_back(row);
    } else {
      t.probs.push_back(p);
    }
  }
  return t;
}

inline void validate_table(const ProbabilityTable& t) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t c = 0; c < kNumTasks; ++c) {
      const bool used = t.head == HeadKind::kMultiLabel || c == static_cast<std::size_t>(t.task);
      const double p = t.probs[i][c];
      if (used && !(p >= 0.0 && p <= 1.0)) {
        throw ParseError("table " + t.model_id + ": probability out of [0,1] for sample " +
                         std::to_string(t.sample_ids[i]));
      }
    }
  }
}

// File format: optional "# key: value" comment lines (head, task), then a
// header row model_id,sample_id,p_toxic,p_engaging,p_fact. Single-label
// tables leave the other two probability cells empty. This is also the
// ingestion format for externally produced (e.g. transformer) probabilities.

inline std::string table_to_csv(const ProbabilityTable& t, char delimiter = ',') {
  std::string out = "# head: ";
  out += head_name(t.head);
  out += '\n';
  if (t.head == HeadKind::kSingleLabel) {
    out += "# task: ";
    out += task_name(t.task);
    out += '\n';
  }
  out += csv::format_row({"model_id", "sample_id", "p_toxic", "p_engaging", "p_fact"}, delimiter);
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::vector<std::string> fields{t.model_id, std::to_string(t.sample_ids[i])};
    for (std::size_t c = 0; c < kNumTasks; ++c) {
      const double p = t.probs[i][c];
      fields.push_back(std::isnan(p) ? std::string() : format_full(p));
    }
    out += csv::format_row(fields, delimiter);
  }
  return out;
}

inline void save_table(const ProbabilityTable& t, const std::string& path, char delimiter = ',') {
  csv::write_file(path, table_to_csv(t, delimiter));
}

inline ProbabilityTable table_from_csv(const std::string& data, char delimiter = ',') {
  std::optional<HeadKind> head;
  std::optional<Task> task;
  std::size_t body_start = 0;
  std::size_t line_no = 0;
  while (body_start < data.size() && data[body_start] == '#') {
    const std::size_t eol = data.find('\n', body_start);
    const std::string line =
        data.substr(body_start + 1, (eol == std::string::npos ? data.size() : eol) - body_start - 1);
    const std::size_t colon = line.find(':');
    if (colon != std::string::npos) {
      const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      const std::string key = trim(line.substr(0, colon));
      const std::string value = trim(line.substr(colon + 1));
      if (key == "head") {
        head = value == "single-label" ? HeadKind::kSingleLabel : HeadKind::kMultiLabel;
      } else if (key == "task") {
        task = task_from_name(value);
      }
    }
    body_start = eol == std::string::npos ? data.size() : eol + 1;
    ++line_no;
  }

  const std::vector<csv::Row> rows = csv::parse(data.substr(body_start), delimiter);
  if (rows.empty()) throw SchemaError("probability table: missing header row");
  const std::vector<std::string> expected = {"model_id", "sample_id", "p_toxic", "p_engaging",
                                             "p_fact"};
  if (rows.front().fields != expected) {
    throw SchemaError("probability table: unexpected column layout");
  }

  ProbabilityTable t;
  std::array<bool, kNumTasks> seen_col = {false, false, false};
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const csv::Row& row = rows[r];
    if (row.fields.size() == 1 && row.fields[0].empty()) continue;
    if (row.fields.size() != expected.size()) {
      throw ParseError("probability table line " + std::to_string(row.line + line_no) +
                       ": expected 5 fields, got " + std::to_string(row.fields.size()));
    }
    if (t.model_id.empty()) {
      t.model_id = row.fields[0];
    } else if (t.model_id != row.fields[0]) {
      throw ParseError("probability table mixes model ids '" + t.model_id + "' and '" +
                       row.fields[0] + "'");
    }
    t.sample_ids.push_back(
        static_cast<std::int64_t>(parse_double(row.fields[1], row.line + line_no)));
    std::array<double, kNumTasks> p = {std::nan(""), std::nan(""), std::nan("")};
    for (std::size_t c = 0; c < kNumTasks; ++c) {
      const std::string& cell = row.fields[2 + c];
      if (!cell.empty()) {
        p[c] = parse_double(cell, row.line + line_no);
        seen_col[c] = true;
      }
    }
    t.probs.push_back(p);
  }

  const int filled = seen_col[0] + seen_col[1] + seen_col[2];
  if (task) {
    t.head = HeadKind::kSingleLabel;
    t.task = *task;
  } else if (head) {
    t.head = *head;
  } else {
    // No metadata: infer from which columns are filled.
    t.head = filled == 1 ? HeadKind::kSingleLabel : HeadKind::kMultiLabel;
    if (filled == 1) {
      for (std::size_t c = 0; c < kNumTasks; ++c) {
        if (seen_col[c]) t.task = static_cast<Task>(c);
      }
    }
  }
  validate_table(t);
  return t;
}

inline ProbabilityTable load_table(const std::string& path, char delimiter = ',') {
  try {
    return table_from_csv(csv::read_file(path), delimiter);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

/// Reorders `t` to match the sample-id order of `reference`. Missing or extra
/// ids are an alignment error listing the offenders.
inline ProbabilityTable align_table(const ProbabilityTable& t,
                                    const std::vector<std::int64_t>& reference) {
  std::unordered_map<std::int64_t, std::size_t> where;
  where.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) where.emplace(t.sample_ids[i], i);

  std::string missing;
  ProbabilityTable out;
  out.model_id = t.model_id;
  out.head = t.head;
  out.task = t.task;
  out.sample_ids = reference;
  out.probs.reserve(reference.size());
  for (std::int64_t id : reference) {
    const auto it = where.find(id);
    if (it == where.end()) {
      missing += missing.empty() ? "" : ", ";
      missing += std::to_string(id);
      continue;
    }
    out.probs.push_back(t.probs[it->second]);
  }
  if (!missing.empty()) {
    throw ConfigError("table " + t.model_id + " is missing sample ids: " + missing);
  }
  if (t.size() != reference.size()) {
    throw ConfigError("table " + t.model_id + " has " + std::to_string(t.size()) +
                      " rows, expected " + std::to_string(reference.size()));
  }
  return out;
}

}  // namespace germeval
