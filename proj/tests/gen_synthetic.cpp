// Writes the bundled synthetic comment corpus (data/synthetic_comments.csv):
// 1000 unique German-flavored comments plus a few exact duplicates, with
// three correlated boolean labels driven by planted signal vocabulary and a
// little label noise. Deterministic; rerunning reproduces the file byte for
// byte.

#include <cstdio>
#include <string>
#include <vector>

#include "germeval/csv.hpp"
#include "germeval/rng.hpp"

using germeval::Rng;

namespace {

const std::vector<std::string> kFiller = {
    "das", "ist", "ein", "kommentar", "zum", "thema", "heute", "wieder", "einfach", "ganz",
    "oder", "aber", "auch", "nicht", "schon", "noch", "immer", "mal", "doch", "sehr",
    "die", "der", "und", "wenn", "dann", "man", "hier", "so", "was", "wer",
    "sendung", "politik", "meinung", "leute", "land", "jahr", "zeit", "frau", "herr", "debatte",
    "gestern", "abend", "wirklich", "eigentlich", "natürlich", "vielleicht", "gerade",
    "deutschland", "europa", "miete", "steuer", "arbeit", "gesellschaft", "medien", "partei",
    "wähler", "bürger", "recht", "gesetz", "problem", "lösung"};

const std::vector<std::string> kToxicSignal = {
    "schwachsinn", "idiot", "dummes", "zeug", "unverschämt", "lächerlich",
    "frechheit", "blödsinn", "peinlich", "absurd", "schämt", "unerträglich"};

const std::vector<std::string> kEngagingSignal = {
    "danke", "interessant", "frage", "respekt", "diskussion", "austausch",
    "verstehe", "perspektive", "zustimmen", "argument", "konstruktiv", "gerne"};

const std::vector<std::string> kFactSignal = {
    "studie", "prozent", "quelle", "laut", "statistik", "bericht",
    "zahlen", "belegt", "untersuchung", "daten", "forschung", "artikel"};

const std::vector<std::string> kEmoji = {"\U0001F600", "\U0001F602", "☕", "\U0001F44D",
                                         "\U0001F621", "⚠", "\U0001F914"};

const std::vector<std::string> kSpaced = {"A K T U E L L", "W I C H T I G", "S K A N D A L"};

const std::vector<std::string> kPunct = {".", "!", "?", "..."};

std::string pick(const std::vector<std::string>& pool, Rng& rng) {
  return pool[rng.next_below(pool.size())];
}

}  // namespace

int main(int argc, char** argv) {
  const std::string out_path = argc > 1 ? argv[1] : "data/synthetic_comments.csv";
  Rng rng(20210921);

  std::string out = "comment_text,Sub1_Toxic,Sub2_Engaging,Sub3_FactClaiming\n";
  std::vector<std::vector<std::string>> rows;
  for (int i = 0; i < 1000; ++i) {
    const bool fact = rng.next_double() < 0.34;
    const bool engaging = rng.next_double() < (fact ? 0.45 : 0.18);
    const bool toxic = rng.next_double() < (engaging ? 0.25 : 0.39);

    std::string t;
    const std::size_t words = 8 + rng.next_below(28);
    for (std::size_t w = 0; w < words; ++w) {
      switch (rng.next_below(24)) {
        case 0: t += "@USER "; break;
        case 1: t += "@MEDIUM "; break;
        case 2: t += pick(kEmoji, rng) + " "; break;
        case 3: t += std::to_string(rng.next_below(100)) + " "; break;
        default: t += pick(kFiller, rng) + " ";
      }
    }
    const auto add_signal = [&](const std::vector<std::string>& pool, bool positive) {
      const std::size_t count =
          positive ? 1 + rng.next_below(3) : (rng.next_double() < 0.06 ? 1 : 0);
      for (std::size_t c = 0; c < count; ++c) t += pick(pool, rng) + " ";
    };
    add_signal(kToxicSignal, toxic);
    add_signal(kEngagingSignal, engaging);
    add_signal(kFactSignal, fact);

    if (rng.next_double() < 0.03) t += pick(kSpaced, rng) + " ";
    if (rng.next_double() < 0.04) t += "zeile\numbruch, mit komma ";
    if (rng.next_double() < 0.05) t += " doppelte  leerzeichen ";
    if (rng.next_double() < 0.005) {
      for (int w = 0; w < 220; ++w) t += pick(kFiller, rng) + " ";
    }
    t += "nr" + std::to_string(i);
    if (rng.next_double() < 0.3) t += pick(kPunct, rng);

    // 4% label noise keeps the tasks imperfectly learnable.
    const auto noisy = [&](bool label) { return rng.next_double() < 0.04 ? !label : label; };
    rows.push_back(
        {t, noisy(toxic) ? "1" : "0", noisy(engaging) ? "1" : "0", noisy(fact) ? "1" : "0"});
  }
  // A few byte-identical duplicates so deduplication has work to do.
  for (int i = 0; i < 12; ++i) {
    rows.push_back(rows[rng.next_below(rows.size())]);
  }
  for (const auto& row : rows) out += germeval::csv::format_row(row);

  germeval::csv::write_file(out_path, out);
  std::printf("wrote %s (%zu rows)\n", out_path.c_str(), rows.size());
  return 0;
}
