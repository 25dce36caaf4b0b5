#pragma once

// Reference-less error detection and the error-count grammaticality score.
// Built-in rule detectors cover spelling (wordlist), repeated words, a/an
// agreement, sentence-initial capitalization, missing terminal punctuation
// and punctuation glued to the following word.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "gecmetric/corpus.hpp"
#include "gecmetric/error.hpp"

namespace gecmetric {

struct ErrorSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string category;
  std::string detector;

  friend bool operator==(const ErrorSpan&, const ErrorSpan&) = default;
};

// Detectors must be safe to call concurrently.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual std::string id() const = 0;
  virtual std::vector<ErrorSpan> detect(const Sentence& sentence) const = 0;

  // Batched form; external checkers override it to pipeline requests.
  virtual std::vector<std::vector<ErrorSpan>> detect_all(std::span<const Sentence> sentences) const {
    std::vector<std::vector<ErrorSpan>> out;
    out.reserve(sentences.size());
    for (const auto& s : sentences) out.push_back(detect(s));
    return out;
  }
};

namespace detail {

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline bool is_ascii_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

inline bool has_letter(std::string_view t) {
  return std::any_of(t.begin(), t.end(), [](char c) {
    return is_ascii_alpha(c) || static_cast<unsigned char>(c) >= 0x80;
  });
}

inline bool has_digit(std::string_view t) {
  return std::any_of(t.begin(), t.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; });
}

inline bool is_punct_char(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

}  // namespace detail

inline bool is_punctuation_token(std::string_view t) {
  return !t.empty() && std::all_of(t.begin(), t.end(), detail::is_punct_char);
}

class Wordlist {
 public:
  Wordlist() = default;
  Wordlist(std::initializer_list<std::string> words) : words_(words) {}

  static Wordlist load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open wordlist '" + path.string() + "'");
    Wordlist wl;
    std::string line;
    while (std::getline(in, line)) {
      for (const auto& w : tokenize(line)) wl.words_.insert(w);
    }
    return wl;
  }

  void add(std::string word) { words_.insert(std::move(word)); }
  bool contains(const std::string& w) const { return words_.count(w) != 0; }
  std::size_t size() const { return words_.size(); }

  // Tokens without letters, or containing digits, are not checked. A word
  // is known if it, its lowercase form, or its first-letter-lowercased form
  // is listed.
  bool is_misspelled(const std::string& token) const {
    if (!detail::has_letter(token) || detail::has_digit(token)) return false;
    if (contains(token)) return false;
    if (contains(detail::ascii_lower(token))) return false;
    std::string first_lower = token;
    first_lower[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(first_lower[0])));
    return !contains(first_lower);
  }

 private:
  std::unordered_set<std::string> words_;
};

class SpellDetector final : public Detector {
 public:
  explicit SpellDetector(std::shared_ptr<const Wordlist> words) : words_(std::move(words)) {}

  std::string id() const override { return "spell"; }

  std::vector<ErrorSpan> detect(const Sentence& s) const override {
    std::vector<ErrorSpan> out;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (words_->is_misspelled(s[i])) out.push_back({i, i + 1, "SPELL", id()});
    return out;
  }

 private:
  std::shared_ptr<const Wordlist> words_;
};

// The same word twice in a row ("the the").
class DuplicateWordDetector final : public Detector {
 public:
  std::string id() const override { return "duplicate"; }

  std::vector<ErrorSpan> detect(const Sentence& s) const override {
    std::vector<ErrorSpan> out;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      if (!detail::has_letter(s[i])) continue;
      if (detail::ascii_lower(s[i]) == detail::ascii_lower(s[i + 1]))
        out.push_back({i, i + 2, "DUP", id()});
    }
    return out;
  }
};

// "a" before a vowel sound or "an" before a consonant sound, judged from
// spelling with a short list of common exceptions.
class ArticleDetector final : public Detector {
 public:
  std::string id() const override { return "article"; }

  static bool starts_with_vowel_sound(const std::string& word) {
    const std::string w = detail::ascii_lower(word);
    static constexpr std::string_view consonant_sound[] = {"uni", "use", "usu", "uti", "eu",
                                                           "one", "once", "ewe", "ure", "ufo"};
    static constexpr std::string_view vowel_sound[] = {"hour", "honest", "honor", "honour", "heir"};
    for (auto p : vowel_sound)
      if (w.starts_with(p)) return true;
    for (auto p : consonant_sound)
      if (w.starts_with(p)) return false;
    return !w.empty() && std::string_view("aeiou").find(w[0]) != std::string_view::npos;
  }

  std::vector<ErrorSpan> detect(const Sentence& s) const override {
    std::vector<ErrorSpan> out;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      const std::string art = detail::ascii_lower(s[i]);
      if (art != "a" && art != "an") continue;
      const std::string& next = s[i + 1];
      if (next.empty() || !detail::is_ascii_alpha(next[0])) continue;
      const bool vowel = starts_with_vowel_sound(next);
      if ((art == "a") == vowel) out.push_back({i, i + 2, "ART", id()});
    }
    return out;
  }
};

// First token starts with a lowercase letter.
class CapitalizationDetector final : public Detector {
 public:
  std::string id() const override { return "capitalization"; }

  std::vector<ErrorSpan> detect(const Sentence& s) const override {
    if (s.empty() || s[0].empty()) return {};
    if (std::islower(static_cast<unsigned char>(s[0][0])))
      return {{0, 1, "CAP", id()}};
    return {};
  }
};

// Sentence does not end in '.', '!' or '?' (closing quotes and brackets
// after the mark are allowed). Reported as a point error at the end.
class TerminalPunctuationDetector final : public Detector {
 public:
  std::string id() const override { return "terminal"; }

  std::vector<ErrorSpan> detect(const Sentence& s) const override {
    if (s.empty()) return {};
    std::size_t k = s.size();
    static const std::set<std::string> closers = {"\"", "''", "'", ")", "]", "\xE2\x80\x9D"};
    while (k > 0 && closers.count(s[k - 1])) --k;
    if (k > 0) {
      const char last = s[k - 1].back();
      if (last == '.' || last == '!' || last == '?') return {};
    }
    return {{s.size(), s.size(), "PUNCT", id()}};
  }
};

// Punctuation attached to the start of the following word (",and"), the
// tokenized trace of a space typed before a comma or period instead of after.
class SpacingDetector final : public Detector {
 public:
  std::string id() const override { return "spacing"; }

  std::vector<ErrorSpan> detect(const Sentence& s) const override {
    std::vector<ErrorSpan> out;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string& t = s[i];
      if (t.size() < 2) continue;
      if (std::string_view(",.;:!?").find(t[0]) == std::string_view::npos) continue;
      if (detail::is_ascii_alpha(t[1])) out.push_back({i, i + 1, "SPACE", id()});
    }
    return out;
  }
};

class DetectorSuite {
 public:
  DetectorSuite() = default;

  void add(std::shared_ptr<const Detector> d) {
    const std::string id = d->id();
    for (const auto& existing : detectors_)
      if (existing->id() == id) throw ValidationError("duplicate detector id '" + id + "'");
    detectors_.push_back(std::move(d));
  }

  std::size_t size() const { return detectors_.size(); }
  std::span<const std::shared_ptr<const Detector>> detectors() const { return detectors_; }

  // Suite without the detector of the given id.
  DetectorSuite without(const std::string& id) const {
    DetectorSuite out;
    for (const auto& d : detectors_)
      if (d->id() != id) out.detectors_.push_back(d);
    return out;
  }

  // Union of all detectors' spans, deduplicated on (start, end, category)
  // and ordered by that key.
  std::vector<ErrorSpan> detect(const Sentence& s) const {
    std::vector<ErrorSpan> all;
    for (const auto& d : detectors_) {
      auto spans = d->detect(s);
      all.insert(all.end(), std::make_move_iterator(spans.begin()),
                 std::make_move_iterator(spans.end()));
    }
    return normalize(std::move(all), s.size());
  }

  std::vector<std::vector<ErrorSpan>> detect_all(std::span<const Sentence> sentences) const {
    std::vector<std::vector<ErrorSpan>> merged(sentences.size());
    for (const auto& d : detectors_) {
      auto per = d->detect_all(sentences);
      for (std::size_t i = 0; i < sentences.size(); ++i)
        merged[i].insert(merged[i].end(), std::make_move_iterator(per[i].begin()),
                         std::make_move_iterator(per[i].end()));
    }
    for (std::size_t i = 0; i < sentences.size(); ++i)
      merged[i] = normalize(std::move(merged[i]), sentences[i].size());
    return merged;
  }

 private:
  static std::vector<ErrorSpan> normalize(std::vector<ErrorSpan> spans, std::size_t len) {
    for (const auto& e : spans)
      if (e.start > e.end || e.end > len)
        throw DetectorError(e.detector, "span (" + std::to_string(e.start) + "," +
                                            std::to_string(e.end) +
                                            ") out of bounds for sentence of length " +
                                            std::to_string(len));
    auto key = [](const ErrorSpan& e) { return std::tie(e.start, e.end, e.category); };
    std::stable_sort(spans.begin(), spans.end(),
                     [&](const auto& a, const auto& b) { return key(a) < key(b); });
    spans.erase(std::unique(spans.begin(), spans.end(),
                            [&](const auto& a, const auto& b) { return key(a) == key(b); }),
                spans.end());
    return spans;
  }

  std::vector<std::shared_ptr<const Detector>> detectors_;
};

inline const std::vector<std::string>& builtin_detector_names() {
  static const std::vector<std::string> names = {"spell",    "duplicate", "article",
                                                 "capitalization", "terminal", "spacing"};
  return names;
}

// `words` may be null when "spell" is not requested.
inline std::shared_ptr<const Detector> make_builtin_detector(
    const std::string& name, std::shared_ptr<const Wordlist> words) {
  if (name == "spell") {
    if (!words) throw ValidationError("the spell detector needs a wordlist");
    return std::make_shared<SpellDetector>(std::move(words));
  }
  if (name == "duplicate") return std::make_shared<DuplicateWordDetector>();
  if (name == "article") return std::make_shared<ArticleDetector>();
  if (name == "capitalization") return std::make_shared<CapitalizationDetector>();
  if (name == "terminal") return std::make_shared<TerminalPunctuationDetector>();
  if (name == "spacing") return std::make_shared<SpacingDetector>();
  throw ValidationError("unknown detector '" + name + "'");
}

// 1 - errors / tokens, clamped at 0. An empty sentence scores 1.
inline double error_count_score(std::size_t errors, std::size_t tokens) {
  if (tokens == 0) return 1.0;
  return std::max(0.0, 1.0 - static_cast<double>(errors) / static_cast<double>(tokens));
}

inline double error_count_score(const Sentence& s, const DetectorSuite& suite) {
  return error_count_score(suite.detect(s).size(), s.size());
}

}  // namespace gecmetric
