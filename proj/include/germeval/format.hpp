#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

#include "germeval/errors.hpp"

namespace germeval {

/// Three decimals, the shared-task reporting convention.
inline std::string format_score(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", value);
  return buf;
}

/// Shortest representation that round-trips a double exactly.
inline std::string format_full(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

inline double parse_double(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw ParseError("line " + std::to_string(line) + ": expected a number, got '" + s + "'");
  }
  return v;
}

}  // namespace germeval
