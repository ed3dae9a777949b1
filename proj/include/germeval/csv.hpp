#pragma once

#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "germeval/errors.hpp"

namespace germeval::csv {

struct Row {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line of the record's first character
};

/// RFC 4180 style parsing with a configurable delimiter: double-quoted fields
/// may contain the delimiter, doubled quotes, and line breaks. CRLF and LF
/// records are both accepted.
inline std::vector<Row> parse(std::string_view data, char delimiter = ',') {
  std::vector<Row> rows;
  Row row;
  std::string field;
  std::size_t line = 1;
  row.line = 1;
  bool in_quotes = false;
  bool field_started = false;
  bool row_started = false;

  const auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  const auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row = Row{};
    row_started = false;
  };

  std::size_t i = 0;
  while (i < data.size()) {
    const char c = data[i];
    if (!row_started) {
      row.line = line;
      row_started = true;
    }
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          field.push_back('"');
          i += 2;
        } else {
          in_quotes = false;
          ++i;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
        ++i;
      }
      continue;
    }
    if (c == '"' && !field_started && field.empty()) {
      in_quotes = true;
      field_started = true;
      ++i;
    } else if (c == delimiter) {
      end_field();
      ++i;
    } else if (c == '\n' || c == '\r') {
      end_row();
      if (c == '\r' && i + 1 < data.size() && data[i + 1] == '\n') ++i;
      ++i;
      ++line;
    } else {
      field.push_back(c);
      field_started = true;
      ++i;
    }
  }
  if (in_quotes) {
    throw ParseError("unterminated quoted field starting near line " + std::to_string(row.line));
  }
  if (row_started || field_started || !field.empty() || !row.fields.empty()) end_row();
  return rows;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::vector<Row> parse_file(const std::string& path, char delimiter = ',') {
  return parse(read_file(path), delimiter);
}

inline bool needs_quoting(std::string_view field, char delimiter) {
  return field.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string_view::npos;
}

inline void write_field(std::string& out, std::string_view field, char delimiter) {
  if (!needs_quoting(field, delimiter)) {
    out.append(field);
    return;
  }
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

inline std::string format_row(const std::vector<std::string>& fields, char delimiter = ',') {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out.push_back(delimiter);
    write_field(out, fields[i], delimiter);
  }
  out.push_back('\n');
  return out;
}

inline void write_file(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("short write: " + path);
}

}  // namespace germeval::csv
