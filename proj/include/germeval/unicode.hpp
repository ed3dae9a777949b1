#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "germeval/unicode_data.hpp"

namespace germeval::unicode {

inline constexpr char32_t kReplacementChar = 0xFFFD;

/// Decodes one UTF-8 code point starting at `pos`; advances `pos` past it.
/// Malformed bytes decode to U+FFFD one byte at a time, so decoding never
/// fails and never stalls.
inline char32_t decode_utf8(std::string_view s, std::size_t& pos) {
  const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
  const unsigned char b0 = byte(pos);
  std::size_t len = 0;
  char32_t cp = 0;
  if (b0 < 0x80) {
    pos += 1;
    return b0;
  } else if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    pos += 1;
    return kReplacementChar;
  }
  if (pos + len > s.size()) {
    pos += 1;
    return kReplacementChar;
  }
  for (std::size_t i = 1; i < len; ++i) {
    const unsigned char b = byte(pos + i);
    if ((b & 0xC0) != 0x80) {
      pos += 1;
      return kReplacementChar;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  // Reject overlong forms and surrogates.
  static constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    pos += 1;
    return kReplacementChar;
  }
  pos += len;
  return cp;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::u32string decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) out.push_back(decode_utf8(s, pos));
  return out;
}

inline std::string encode(const std::u32string& cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) append_utf8(out, cp);
  return out;
}

/// Unicode White_Space property (25 code points as of Unicode 13).
inline bool is_whitespace(char32_t cp) {
  switch (cp) {
    case 0x0009: case 0x000A: case 0x000B: case 0x000C: case 0x000D:
    case 0x0020: case 0x0085: case 0x00A0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

inline std::uint8_t combining_class(char32_t cp) {
  const auto* begin = std::begin(unicode_data::kCombiningClasses);
  const auto* end = std::end(unicode_data::kCombiningClasses);
  const auto* it = std::lower_bound(begin, end, cp, [](const auto& e, char32_t c) { return e.cp < c; });
  return (it != end && it->cp == cp) ? it->ccc : 0;
}

namespace detail {

inline constexpr char32_t kHangulSBase = 0xAC00;
inline constexpr char32_t kHangulLBase = 0x1100;
inline constexpr char32_t kHangulVBase = 0x1161;
inline constexpr char32_t kHangulTBase = 0x11A7;
inline constexpr int kHangulLCount = 19;
inline constexpr int kHangulVCount = 21;
inline constexpr int kHangulTCount = 28;
inline constexpr int kHangulNCount = kHangulVCount * kHangulTCount;
inline constexpr int kHangulSCount = kHangulLCount * kHangulNCount;

inline void decompose_cp(char32_t cp, std::u32string& out) {
  if (cp >= kHangulSBase && cp < kHangulSBase + kHangulSCount) {
    const int s = static_cast<int>(cp - kHangulSBase);
    out.push_back(kHangulLBase + s / kHangulNCount);
    out.push_back(kHangulVBase + (s % kHangulNCount) / kHangulTCount);
    if (s % kHangulTCount != 0) out.push_back(kHangulTBase + s % kHangulTCount);
    return;
  }
  const auto* begin = std::begin(unicode_data::kDecompositions);
  const auto* end = std::end(unicode_data::kDecompositions);
  const auto* it = std::lower_bound(begin, end, cp, [](const auto& e, char32_t c) { return e.cp < c; });
  if (it != end && it->cp == cp) {
    for (std::uint32_t i = 0; i < it->length; ++i) {
      out.push_back(unicode_data::kDecompositionPool[it->offset + i]);
    }
  } else {
    out.push_back(cp);
  }
}

inline char32_t compose_pair(char32_t a, char32_t b) {
  if (a >= kHangulLBase && a < kHangulLBase + kHangulLCount && b >= kHangulVBase &&
      b < kHangulVBase + kHangulVCount) {
    return kHangulSBase + ((a - kHangulLBase) * kHangulVCount + (b - kHangulVBase)) * kHangulTCount;
  }
  if (a >= kHangulSBase && a < kHangulSBase + kHangulSCount &&
      (a - kHangulSBase) % kHangulTCount == 0 && b > kHangulTBase &&
      b < kHangulTBase + kHangulTCount) {
    return a + (b - kHangulTBase);
  }
  const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
  const auto* begin = std::begin(unicode_data::kCompositionPairs);
  const auto* end = std::end(unicode_data::kCompositionPairs);
  const auto* it = std::lower_bound(begin, end, key, [](const auto& e, std::uint64_t k) { return e.key < k; });
  return (it != end && it->key == key) ? it->composite : 0;
}

}  // namespace detail

/// Canonical composition normal form. Decompose, reorder combining marks by
/// combining class (stable), then recompose primary composites.
inline std::string nfc(std::string_view text) {
  std::u32string cps;
  cps.reserve(text.size());
  {
    std::size_t pos = 0;
    while (pos < text.size()) detail::decompose_cp(decode_utf8(text, pos), cps);
  }

  // Canonical ordering: stable-sort each run of nonzero-ccc marks.
  for (std::size_t i = 1; i < cps.size(); ++i) {
    const std::uint8_t ccc = combining_class(cps[i]);
    if (ccc == 0) continue;
    std::size_t j = i;
    while (j > 0) {
      const std::uint8_t prev = combining_class(cps[j - 1]);
      if (prev == 0 || prev <= ccc) break;
      std::swap(cps[j - 1], cps[j]);
      --j;
    }
  }

  // Composition pass per UAX #15.
  std::u32string out;
  out.reserve(cps.size());
  std::ptrdiff_t last_starter = -1;
  std::uint8_t last_ccc = 0;
  for (char32_t cp : cps) {
    const std::uint8_t ccc = combining_class(cp);
    if (last_starter >= 0 && (last_ccc < ccc || (last_ccc == 0 && ccc == 0))) {
      if (const char32_t comp = detail::compose_pair(out[static_cast<std::size_t>(last_starter)], cp)) {
        out[static_cast<std::size_t>(last_starter)] = comp;
        continue;
      }
    }
    if (ccc == 0) {
      last_starter = static_cast<std::ptrdiff_t>(out.size());
      last_ccc = 0;
    } else {
      last_ccc = ccc;
    }
    out.push_back(cp);
  }
  return encode(out);
}

}  // namespace germeval::unicode
