#pragma once

#include <cctype>
#include <cmath>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mcq/error.hpp"
#include "mcq/item_bank.hpp"
#include "mcq/numeric.hpp"
#include "mcq/word_lists.hpp"

namespace mcq {

// Familiar-word list for Dale-Chall or Spache. Lookups are lowercase exact
// matches.
class WordList {
 public:
  WordList() = default;

  template <std::size_t N>
  explicit WordList(const std::array<std::string_view, N>& words) {
    for (auto w : words) words_.emplace(w);
  }

  // Newline-delimited UTF-8 file, one word per line.
  static WordList load(const std::filesystem::path& path) {
    WordList list;
    const std::string text = read_text_file(path);
    std::size_t pos = 0;
    while (pos < text.size()) {
      auto nl = text.find('\n', pos);
      if (nl == std::string::npos) nl = text.size();
      std::string word = text.substr(pos, nl - pos);
      while (!word.empty() && std::isspace(static_cast<unsigned char>(word.back()))) word.pop_back();
      std::size_t start = 0;
      while (start < word.size() && std::isspace(static_cast<unsigned char>(word[start]))) ++start;
      word = word.substr(start);
      for (char& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (!word.empty()) list.words_.insert(std::move(word));
      pos = nl + 1;
    }
    return list;
  }

  bool contains(std::string_view lower_word) const { return words_.contains(std::string(lower_word)); }
  std::size_t size() const noexcept { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

inline const WordList& default_dale_chall_list() {
  static const WordList list(word_lists::kDaleChallSubset);
  return list;
}

inline const WordList& default_spache_list() {
  static const WordList list(word_lists::kSpacheSubset);
  return list;
}

struct TextStats {
  std::size_t sentences = 0;
  std::size_t words = 0;
  std::size_t characters = 0;  // letters and digits
  std::size_t syllables = 0;
  std::size_t complex_words = 0;  // three or more syllables
  std::size_t difficult_words_dale = 0;
  std::size_t difficult_words_spache = 0;
  std::size_t long_words_linsear = 0;  // three or more syllables
  bool operator==(const TextStats&) const = default;
};

namespace detail {

inline bool is_word_char(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

inline bool is_vowel(char c) {
  switch (c) {
    case 'a': case 'e': case 'i': case 'o': case 'u': case 'y':
      return true;
    default:
      return false;
  }
}

// Splits on whitespace and strips non-word characters from both ends.
inline std::vector<std::string_view> tokenize_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::size_t b = i, e = j;
    while (b < e && !is_word_char(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && !is_word_char(static_cast<unsigned char>(text[e - 1]))) --e;
    if (b < e) words.push_back(text.substr(b, e - b));
    i = j;
  }
  return words;
}

// A sentence ends at '.', '!' or '?' followed by whitespace or end of text.
inline std::vector<std::string_view> split_sentences(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if ((c == '.' || c == '!' || c == '?') &&
        (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])))) {
      out.push_back(text.substr(start, i + 1 - start));
      start = i + 1;
    }
  }
  if (start < text.size()) out.push_back(text.substr(start));
  return out;
}

inline std::string lowercase_letters(std::string_view word) {
  std::string out;
  for (char c : word) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalpha(u)) out.push_back(static_cast<char>(std::tolower(u)));
  }
  return out;
}

inline std::string lowercase(std::string_view word) {
  std::string out(word);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace detail

// Vowel-group heuristic: count runs of a/e/i/o/u/y, drop a trailing 'e' that
// forms its own run (unless it is the only run), never below 1.
inline std::size_t count_syllables(std::string_view word) {
  const std::string w = detail::lowercase_letters(word);
  std::size_t groups = 0;
  bool in_group = false;
  for (char c : w) {
    const bool v = detail::is_vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  if (groups > 1 && w.size() >= 2 && w.back() == 'e' && !detail::is_vowel(w[w.size() - 2])) --groups;
  return groups == 0 ? 1 : groups;
}

inline TextStats text_stats(std::string_view text, const WordList& dale, const WordList& spache) {
  TextStats s;
  for (auto sentence : detail::split_sentences(text)) {
    if (!detail::tokenize_words(sentence).empty()) ++s.sentences;
  }
  for (auto word : detail::tokenize_words(text)) {
    ++s.words;
    for (char c : word) {
      const auto u = static_cast<unsigned char>(c);
      // UTF-8 lead bytes count once per code point.
      if (std::isalnum(u) || u >= 0xC0) ++s.characters;
    }
    const std::size_t syl = count_syllables(word);
    s.syllables += syl;
    if (syl >= 3) {
      ++s.complex_words;
      ++s.long_words_linsear;
    }
    // Tokens without letters (numbers) count as familiar.
    if (!detail::lowercase_letters(word).empty()) {
      const std::string lower = detail::lowercase(word);
      if (!dale.contains(lower)) ++s.difficult_words_dale;
      if (!spache.contains(lower)) ++s.difficult_words_spache;
    }
  }
  return s;
}

inline TextStats text_stats(std::string_view text) {
  return text_stats(text, default_dale_chall_list(), default_spache_list());
}

// Higher values mean harder text for all seven.
struct ReadabilityIndices {
  double flesch_kincaid = 0.0;
  double dale_chall = 0.0;
  double ari = 0.0;
  double coleman_liau = 0.0;
  double gunning_fog = 0.0;
  double spache = 0.0;
  double linsear_write = 0.0;

  // (name, value) in table order.
  std::vector<std::pair<std::string, double>> named() const {
    return {{"Flesch-K", flesch_kincaid}, {"Dale", dale_chall},       {"ARI", ari},
            {"Coleman", coleman_liau},    {"Gunning", gunning_fog},   {"Spache", spache},
            {"Linsear", linsear_write}};
  }
};

inline ReadabilityIndices readability_indices(const TextStats& s) {
  if (s.words == 0 || s.sentences == 0) {
    throw DomainError("readability undefined for text without words or sentences");
  }
  const double words = static_cast<double>(s.words);
  const double words_per_sentence = words / static_cast<double>(s.sentences);

  ReadabilityIndices r;
  r.flesch_kincaid = 0.39 * words_per_sentence + 11.8 * (static_cast<double>(s.syllables) / words) - 15.59;
  r.ari = 4.71 * (static_cast<double>(s.characters) / words) + 0.5 * words_per_sentence - 21.43;

  const double letters_per_100 = 100.0 * static_cast<double>(s.characters) / words;
  const double sentences_per_100 = 100.0 * static_cast<double>(s.sentences) / words;
  r.coleman_liau = 0.0588 * letters_per_100 - 0.296 * sentences_per_100 - 15.8;

  r.gunning_fog = 0.4 * (words_per_sentence + 100.0 * static_cast<double>(s.complex_words) / words);

  const double dale_pct = 100.0 * static_cast<double>(s.difficult_words_dale) / words;
  r.dale_chall = 0.1579 * dale_pct + 0.0496 * words_per_sentence;
  if (dale_pct > 5.0) r.dale_chall += 3.6365;

  const double spache_pct = 100.0 * static_cast<double>(s.difficult_words_spache) / words;
  r.spache = 0.121 * words_per_sentence + 0.082 * spache_pct + 0.659;

  // Linsear Write over the whole text: easy words score 1, hard words 3.
  const double easy = static_cast<double>(s.words - s.long_words_linsear);
  const double hard = static_cast<double>(s.long_words_linsear);
  const double provisional = (easy + 3.0 * hard) / static_cast<double>(s.sentences);
  r.linsear_write = provisional > 20.0 ? provisional / 2.0 : (provisional - 2.0) / 2.0;
  return r;
}

// Classifier output over {easy, medium, hard}.
struct ComplexityProbs {
  double p_easy = 0.0;
  double p_medium = 0.0;
  double p_hard = 0.0;
};

// 0 * easy + 50 * medium + 100 * hard.
inline double complexity_score(const ComplexityProbs& p) {
  for (double v : {p.p_easy, p.p_medium, p.p_hard}) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("complexity probability outside [0, 1]");
  }
  if (std::abs(p.p_easy + p.p_medium + p.p_hard - 1.0) > kUnitSumTolerance) {
    throw DomainError("complexity probabilities do not sum to 1");
  }
  return 0.0 * p.p_easy + 50.0 * p.p_medium + 100.0 * p.p_hard;
}

// Complexity-probs file: {"item_id": [p_easy, p_medium, p_hard], ...}.
inline std::map<std::string, ComplexityProbs> parse_complexity_probs(std::string_view text,
                                                                     std::string_view source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(source) + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError(std::string(source) + ": expected an object keyed by item_id");
  std::map<std::string, ComplexityProbs> out;
  std::vector<std::string> findings;
  for (const auto& [id, v] : doc.items()) {
    const std::string locator = std::string(source) + ":entry '" + id + "'";
    const auto p = detail::as_number_array(v, locator, id.c_str());
    if (p.size() != 3) {
      findings.push_back(locator + ": expected 3 probabilities");
      continue;
    }
    auto problems = detail::check_distribution(p, locator);
    if (!problems.empty()) {
      findings.insert(findings.end(), problems.begin(), problems.end());
      continue;
    }
    out.emplace(id, ComplexityProbs{p[0], p[1], p[2]});
  }
  if (!findings.empty()) throw ValidationError(std::move(findings));
  return out;
}

inline std::map<std::string, ComplexityProbs> load_complexity_probs(const std::filesystem::path& path) {
  return parse_complexity_probs(read_text_file(path), path.string());
}

enum class TextUnit { full_item, context_only };

// Text scored for one item: context, question and every option, or the
// context alone.
inline std::string item_text(const Item& item, TextUnit unit = TextUnit::full_item) {
  if (unit == TextUnit::context_only) return item.context;
  std::string text = item.context;
  text += '\n';
  text += item.question;
  for (const auto& o : item.options) {
    text += '\n';
    text += o;
  }
  return text;
}

struct SummaryCell {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n - 1)
  std::size_t n = 0;
  bool single_item = false;  // stddev undefined, reported as 0
};

// Per-level mean and sample standard deviation.
inline std::map<std::string, SummaryCell> level_summary(
    const std::map<std::string, std::vector<double>>& scores_by_level) {
  std::map<std::string, SummaryCell> out;
  for (const auto& [level, scores] : scores_by_level) {
    if (scores.empty()) throw DomainError("level '" + level + "' has no scores");
    out[level] = {mean(scores), sample_stddev(scores), scores.size(), scores.size() == 1};
  }
  return out;
}

}  // namespace mcq
