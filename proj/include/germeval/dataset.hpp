#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "germeval/csv.hpp"
#include "germeval/errors.hpp"
#include "germeval/text.hpp"
#include "germeval/unicode.hpp"

namespace germeval {

inline constexpr std::size_t kNumTasks = 3;

enum class Task : int { kToxic = 0, kEngaging = 1, kFact = 2 };

inline const char* task_name(Task t) {
  switch (t) {
    case Task::kToxic: return "toxic";
    case Task::kEngaging: return "engaging";
    case Task::kFact: return "fact";
  }
  return "?";
}

inline Task task_from_name(const std::string& name) {
  for (int i = 0; i < static_cast<int>(kNumTasks); ++i) {
    if (name == task_name(static_cast<Task>(i))) return static_cast<Task>(i);
  }
  throw ConfigError("unknown task name: " + name + " (expected toxic|engaging|fact)");
}

using LabelTriple = std::array<bool, kNumTasks>;

/// One text sample. Labels are absent on unlabeled test data.
struct Comment {
  std::int64_t id = 0;
  std::string text;
  std::optional<LabelTriple> labels;
};

/// Column names of the input file. Defaults match the GermEval 2021 release.
struct DatasetSchema {
  std::string id_column = "comment_id";  // optional in inputs; written on save
  std::string text_column = "comment_text";
  std::array<std::string, kNumTasks> label_columns = {"Sub1_Toxic", "Sub2_Engaging",
                                                      "Sub3_FactClaiming"};
  char delimiter = ',';
};

struct Provenance {
  std::string source_path;
  bool deduplicated = false;
  bool preprocessed = false;
};

struct Dataset {
  std::vector<Comment> comments;
  Provenance provenance;

  std::size_t size() const { return comments.size(); }
  bool labeled() const {
    return !comments.empty() && comments.front().labels.has_value();
  }

  /// id -> position lookup for joining probability tables back to samples.
  std::unordered_map<std::int64_t, std::size_t> id_index() const {
    std::unordered_map<std::int64_t, std::size_t> index;
    index.reserve(comments.size());
    for (std::size_t i = 0; i < comments.size(); ++i) index.emplace(comments[i].id, i);
    return index;
  }
};

namespace detail {

inline std::optional<std::size_t> find_column(const std::vector<std::string>& header,
                                              const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

inline bool parse_label_cell(const std::string& cell, std::size_t line, const std::string& column) {
  if (cell == "0") return false;
  if (cell == "1") return true;
  throw ParseError("line " + std::to_string(line) + ": column '" + column +
                   "' must be 0 or 1, got '" + cell + "'");
}

}  // namespace detail

/// Loads a delimiter-separated dataset with a header row. Label columns are
/// optional as a group (unlabeled test data); a partially present label set
/// is rejected. Ids come from the id column when present, otherwise from row
/// order.
inline Dataset load_dataset(const std::string& path, const DatasetSchema& schema = {}) {
  const std::vector<csv::Row> rows = csv::parse_file(path, schema.delimiter);
  if (rows.empty()) throw SchemaError(path + ": empty file, expected a header row");

  const std::vector<std::string>& header = rows.front().fields;
  const auto text_col = detail::find_column(header, schema.text_column);
  if (!text_col) throw SchemaError(path + ": missing text column '" + schema.text_column + "'");
  const auto id_col = detail::find_column(header, schema.id_column);

  std::array<std::optional<std::size_t>, kNumTasks> label_cols;
  std::size_t labels_found = 0;
  for (std::size_t t = 0; t < kNumTasks; ++t) {
    label_cols[t] = detail::find_column(header, schema.label_columns[t]);
    if (label_cols[t]) ++labels_found;
  }
  if (labels_found != 0 && labels_found != kNumTasks) {
    for (std::size_t t = 0; t < kNumTasks; ++t) {
      if (!label_cols[t]) {
        throw SchemaError(path + ": missing label column '" + schema.label_columns[t] +
                          "' (found " + std::to_string(labels_found) + " of 3)");
      }
    }
  }
  const bool labeled = labels_found == kNumTasks;

  Dataset out;
  out.provenance.source_path = path;
  out.comments.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const csv::Row& row = rows[r];
    if (row.fields.size() == 1 && row.fields[0].empty()) continue;  // trailing blank line
    Comment c;
    const auto cell = [&](std::size_t col) -> const std::string& {
      if (col >= row.fields.size()) {
        throw ParseError("line " + std::to_string(row.line) + ": expected at least " +
                         std::to_string(col + 1) + " fields, got " +
                         std::to_string(row.fields.size()));
      }
      return row.fields[col];
    };
    c.text = cell(*text_col);
    if (id_col) {
      try {
        c.id = std::stoll(cell(*id_col));
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(row.line) + ": column '" + schema.id_column +
                         "' must be an integer, got '" + cell(*id_col) + "'");
      }
    } else {
      c.id = static_cast<std::int64_t>(out.comments.size());
    }
    if (labeled) {
      LabelTriple labels{};
      for (std::size_t t = 0; t < kNumTasks; ++t) {
        labels[t] = detail::parse_label_cell(cell(*label_cols[t]), row.line, schema.label_columns[t]);
      }
      c.labels = labels;
    }
    out.comments.push_back(std::move(c));
  }

  std::unordered_set<std::int64_t> seen;
  for (const Comment& c : out.comments) {
    if (!seen.insert(c.id).second) {
      throw ParseError(path + ": duplicate comment id " + std::to_string(c.id));
    }
  }
  return out;
}

inline void save_dataset(const Dataset& d, const std::string& path,
                         const DatasetSchema& schema = {}) {
  std::string out;
  std::vector<std::string> header{schema.id_column, schema.text_column};
  if (d.labeled()) {
    for (const auto& c : schema.label_columns) header.push_back(c);
  }
  out += csv::format_row(header, schema.delimiter);
  for (const Comment& c : d.comments) {
    std::vector<std::string> fields{std::to_string(c.id), c.text};
    if (d.labeled()) {
      for (std::size_t t = 0; t < kNumTasks; ++t) fields.push_back(c.labels->at(t) ? "1" : "0");
    }
    out += csv::format_row(fields, schema.delimiter);
  }
  csv::write_file(path, out);
}

/// Removes duplicate texts, keeping the first occurrence; order and ids are
/// preserved. Texts compare byte-identical after Unicode NFC normalization
/// (raw case, no other transforms), before any preprocessing.
inline Dataset deduplicate(const Dataset& d) {
  Dataset out;
  out.provenance = d.provenance;
  out.provenance.deduplicated = true;
  out.comments.reserve(d.comments.size());
  std::unordered_set<std::string> seen;
  seen.reserve(d.comments.size());
  for (const Comment& c : d.comments) {
    if (seen.insert(unicode::nfc(c.text)).second) out.comments.push_back(c);
  }
  return out;
}

struct PreprocessStats {
  std::size_t input_rows = 0;
  std::size_t after_dedup = 0;
  std::size_t truncation_affected = 0;  // informational; proxy tokenizer, not WordPiece
  std::size_t max_tokens = text::kDefaultMaxTokens;
};

/// Applies the full text pipeline to every comment of an already-deduplicated
/// dataset. A comment that cleans down to nothing violates the corpus
/// contract and is reported as a parse error.
inline Dataset preprocess_dataset(const Dataset& d,
                                  std::size_t max_tokens = text::kDefaultMaxTokens,
                                  PreprocessStats* stats = nullptr) {
  Dataset out;
  out.provenance = d.provenance;
  out.provenance.preprocessed = true;
  out.comments.reserve(d.comments.size());
  for (const Comment& c : d.comments) {
    Comment p = c;
    const std::string cleaned =
        text::normalize_whitespace(text::buffer_emojis(text::remove_inword_whitespace(c.text)));
    p.text = text::truncate_tokens(cleaned, max_tokens);
    if (p.text.empty()) {
      throw ParseError("comment id " + std::to_string(c.id) + " is empty after preprocessing");
    }
    if (stats && text::count_tokens(cleaned) > max_tokens) ++stats->truncation_affected;
    out.comments.push_back(std::move(p));
  }
  if (stats) stats->max_tokens = max_tokens;
  return out;
}

}  // namespace germeval
