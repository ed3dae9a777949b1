#pragma once

#include <algorithm>
#include <cstdint>
#include <string_view>
#include <vector>

#include "germeval/errors.hpp"
#include "germeval/unicode.hpp"

namespace germeval {

struct FeaturizerConfig {
  std::uint32_t n_min = 2;
  std::uint32_t n_max = 5;
  std::uint64_t buckets = 1u << 18;  // power of two recommended
};

/// Sparse hashed bag of character n-grams: bucket -> count, sorted by bucket.
struct FeatureVector {
  std::uint64_t buckets = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;
};

namespace detail {

inline std::uint64_t fnv1a_init() { return 0xCBF29CE484222325ull; }

inline std::uint64_t fnv1a_step(std::uint64_t h, char32_t cp) {
  for (int shift = 0; shift < 32; shift += 8) {
    h ^= (static_cast<std::uint64_t>(cp) >> shift) & 0xFF;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace detail

/// Counts character n-grams (n over code points) hashed into a fixed bucket
/// space. Deterministic; empty text yields an empty vector.
inline FeatureVector featurize(std::string_view txt, const FeaturizerConfig& cfg) {
  if (cfg.n_min < 1 || cfg.n_max < cfg.n_min) {
    throw ContractError("featurize: invalid n-gram range");
  }
  if (cfg.buckets < 1) throw ContractError("featurize: bucket count must be >= 1");
  const std::u32string cps = unicode::decode(txt);

  std::vector<std::uint32_t> raw;
  raw.reserve(cps.size() * (cfg.n_max - cfg.n_min + 1));
  const bool pow2 = (cfg.buckets & (cfg.buckets - 1)) == 0;
  for (std::uint32_t n = cfg.n_min; n <= cfg.n_max; ++n) {
    if (cps.size() < n) break;
    for (std::size_t i = 0; i + n <= cps.size(); ++i) {
      std::uint64_t h = detail::fnv1a_step(detail::fnv1a_init(), static_cast<char32_t>(n));
      for (std::size_t j = 0; j < n; ++j) h = detail::fnv1a_step(h, cps[i + j]);
      raw.push_back(static_cast<std::uint32_t>(pow2 ? (h & (cfg.buckets - 1)) : (h % cfg.buckets)));
    }
  }
  std::sort(raw.begin(), raw.end());

  FeatureVector out;
  out.buckets = cfg.buckets;
  for (std::size_t i = 0; i < raw.size();) {
    std::size_t j = i;
    while (j < raw.size() && raw[j] == raw[i]) ++j;
    out.entries.emplace_back(raw[i], static_cast<std::uint32_t>(j - i));
    i = j;
  }
  return out;
}

}  // namespace germeval
