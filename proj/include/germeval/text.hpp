#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "germeval/unicode.hpp"

namespace germeval::text {

/// Emoji table used by buffering: the common pictographic blocks plus the
/// variation selector / zero-width joiner that glue sequences together.
inline bool is_emoji_base(char32_t cp) {
  return (cp >= 0x1F300 && cp <= 0x1F5FF) || (cp >= 0x1F600 && cp <= 0x1F64F) ||
         (cp >= 0x1F680 && cp <= 0x1F6FF) || (cp >= 0x1F900 && cp <= 0x1F9FF) ||
         (cp >= 0x2600 && cp <= 0x26FF) || (cp >= 0x2700 && cp <= 0x27BF);
}

inline bool is_emoji_joiner(char32_t cp) { return cp == 0xFE0F || cp == 0x200D; }

namespace detail {

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;  // past-the-end, code point indices
};

inline std::vector<Span> tokenize(const std::u32string& cps) {
  std::vector<Span> tokens;
  std::size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && unicode::is_whitespace(cps[i])) ++i;
    if (i >= cps.size()) break;
    Span s{i, i};
    while (i < cps.size() && !unicode::is_whitespace(cps[i])) ++i;
    s.end = i;
    tokens.push_back(s);
  }
  return tokens;
}

/// A token made only of emoji code points (at least one base, possibly glued
/// with FE0F/200D). Such tokens never take part in letter-spacing joins.
inline bool is_emoji_token(const std::u32string& cps, const Span& t) {
  bool has_base = false;
  for (std::size_t i = t.begin; i < t.end; ++i) {
    if (is_emoji_base(cps[i])) {
      has_base = true;
    } else if (!is_emoji_joiner(cps[i])) {
      return false;
    }
  }
  return has_base;
}

}  // namespace detail

/// Joins letter-spacing artifacts: every maximal run of >= 3 consecutive
/// single-code-point tokens is concatenated into one token ("A K T U E L L !"
/// -> "AKTUELL!"). Runs of one or two are left alone (they are too often
/// legitimate words). Emoji tokens break runs and also shield their immediate
/// neighbors from joining, which keeps the full preprocessing pipeline
/// idempotent once emoji buffering has split text around emoji.
inline std::string remove_inword_whitespace(std::string_view text) {
  const std::u32string cps = unicode::decode(text);
  const std::vector<detail::Span> tokens = detail::tokenize(cps);

  std::vector<bool> emoji(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) emoji[i] = detail::is_emoji_token(cps, tokens[i]);

  std::vector<bool> joinable(tokens.size(), false);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].end - tokens[i].begin != 1 || emoji[i]) continue;
    if (i > 0 && emoji[i - 1]) continue;
    if (i + 1 < tokens.size() && emoji[i + 1]) continue;
    joinable[i] = true;
  }

  std::u32string out;
  out.reserve(cps.size());
  std::size_t copied = 0;  // everything before this code point index is emitted
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t j = i;
    while (j < tokens.size() && joinable[j]) ++j;
    if (j - i >= 3) {
      out.append(cps, copied, tokens[i].begin - copied);
      for (std::size_t t = i; t < j; ++t) out.push_back(cps[tokens[t].begin]);
      copied = tokens[j - 1].end;
      i = j;
    } else {
      i = (j == i) ? i + 1 : j;
    }
  }
  out.append(cps, copied, cps.size() - copied);
  return unicode::encode(out);
}

/// Surrounds every emoji cluster with single spaces so tokenization isolates
/// it from adjacent words. A cluster is an emoji base with an optional FE0F,
/// extended over ZWJ-joined bases; bare FE0F/200D outside a cluster pass
/// through untouched.
inline std::string buffer_emojis(std::string_view text) {
  const std::u32string cps = unicode::decode(text);
  std::u32string out;
  out.reserve(cps.size() + 8);
  std::size_t i = 0;
  while (i < cps.size()) {
    if (!is_emoji_base(cps[i])) {
      out.push_back(cps[i++]);
      continue;
    }
    std::size_t end = i + 1;
    if (end < cps.size() && cps[end] == 0xFE0F) ++end;
    while (end + 1 < cps.size() && cps[end] == 0x200D && is_emoji_base(cps[end + 1])) {
      end += 2;
      if (end < cps.size() && cps[end] == 0xFE0F) ++end;
    }
    out.push_back(U' ');
    out.append(cps, i, end - i);
    out.push_back(U' ');
    i = end;
  }
  return unicode::encode(out);
}

/// Trims leading/trailing whitespace and collapses every internal whitespace
/// run (any Unicode White_Space code points) to a single ASCII space.
inline std::string normalize_whitespace(std::string_view text) {
  const std::u32string cps = unicode::decode(text);
  std::u32string out;
  out.reserve(cps.size());
  bool pending_space = false;
  for (char32_t cp : cps) {
    if (unicode::is_whitespace(cp)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(U' ');
      pending_space = false;
      out.push_back(cp);
    }
  }
  return unicode::encode(out);
}

/// Number of whitespace-separated tokens.
inline std::size_t count_tokens(std::string_view text) {
  return detail::tokenize(unicode::decode(text)).size();
}

/// Keeps the first max_tokens whitespace tokens; separators up to the last
/// kept token are preserved verbatim. max_tokens must be >= 1.
inline std::string truncate_tokens(std::string_view text, std::size_t max_tokens) {
  const std::u32string cps = unicode::decode(text);
  const std::vector<detail::Span> tokens = detail::tokenize(cps);
  if (tokens.size() <= max_tokens) return std::string(text);
  return unicode::encode(cps.substr(0, tokens[max_tokens - 1].end));
}

inline constexpr std::size_t kDefaultMaxTokens = 200;

/// The full cleaning pipeline: in-word whitespace removal, emoji buffering,
/// whitespace normalization, token truncation. Idempotent as a whole.
inline std::string preprocess(std::string_view text, std::size_t max_tokens = kDefaultMaxTokens) {
  return truncate_tokens(normalize_whitespace(buffer_emojis(remove_inword_whitespace(text))),
                         max_tokens);
}

}  // namespace germeval::text
