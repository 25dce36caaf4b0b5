#pragma once

// Core data model: sentences, gold edits, annotations, references and
// system outputs. Everything here is immutable after construction.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gecmetric/error.hpp"

namespace gecmetric {

namespace detail {

// Length in bytes of a Unicode whitespace code point starting at s[i], or 0.
inline std::size_t whitespace_len(std::string_view s, std::size_t i) {
  const auto c = static_cast<unsigned char>(s[i]);
  if (c == ' ' || (c >= 0x09 && c <= 0x0d)) return 1;
  if (c < 0x80) return 0;
  auto at = [&](std::size_t k) -> unsigned char {
    return i + k < s.size() ? static_cast<unsigned char>(s[i + k]) : 0;
  };
  if (c == 0xc2 && (at(1) == 0x85 || at(1) == 0xa0)) return 2;  // NEL, NBSP
  if (c == 0xe1 && at(1) == 0x9a && at(2) == 0x80) return 3;    // U+1680
  if (c == 0xe2 && at(1) == 0x80) {
    const unsigned char t = at(2);
    if ((t >= 0x80 && t <= 0x8a) || t == 0xa8 || t == 0xa9 || t == 0xaf) return 3;
  }
  if (c == 0xe2 && at(1) == 0x81 && at(2) == 0x9f) return 3;  // U+205F
  if (c == 0xe3 && at(1) == 0x80 && at(2) == 0x80) return 3;  // U+3000
  return 0;
}

}  // namespace detail

// A token is a non-empty run of non-whitespace characters.
inline bool is_valid_token(std::string_view t) {
  if (t.empty()) return false;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (detail::whitespace_len(t, i) != 0) return false;
  return true;
}

class Sentence {
 public:
  Sentence() = default;

  explicit Sentence(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    for (std::size_t i = 0; i < tokens_.size(); ++i)
      if (!is_valid_token(tokens_[i]))
        throw ValidationError("invalid token at position " + std::to_string(i) + ": '" +
                              tokens_[i] + "'");
  }

  Sentence(std::initializer_list<std::string> tokens)
      : Sentence(std::vector<std::string>(tokens)) {}

  std::span<const std::string> tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens_[i]; }
  auto begin() const { return tokens_.begin(); }
  auto end() const { return tokens_.end(); }

  // Tokens in [start, end) as a new sentence.
  Sentence slice(std::size_t start, std::size_t end) const {
    Sentence out;
    out.tokens_.assign(tokens_.begin() + static_cast<std::ptrdiff_t>(start),
                       tokens_.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
  }

  friend bool operator==(const Sentence&, const Sentence&) = default;
  friend auto operator<=>(const Sentence&, const Sentence&) = default;

 private:
  std::vector<std::string> tokens_;
};

// Split on runs of Unicode whitespace. No case or punctuation normalization.
inline Sentence tokenize(std::string_view raw) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  std::size_t start = std::string_view::npos;
  while (i < raw.size()) {
    if (const std::size_t ws = detail::whitespace_len(raw, i); ws != 0) {
      if (start != std::string_view::npos) {
        tokens.emplace_back(raw.substr(start, i - start));
        start = std::string_view::npos;
      }
      i += ws;
    } else {
      if (start == std::string_view::npos) start = i;
      ++i;
    }
  }
  if (start != std::string_view::npos) tokens.emplace_back(raw.substr(start));
  return Sentence(std::move(tokens));
}

inline std::string detokenize(const Sentence& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ' ';
    out += s[i];
  }
  return out;
}

// A gold correction: source tokens [start, end) become `replacement`.
struct Edit {
  std::size_t start = 0;
  std::size_t end = 0;
  Sentence replacement;
  std::string category;
  int annotator = 0;
  // Preserved from the M2 file; not used in scoring.
  std::string required = "REQUIRED";
  std::string comment = "-NONE-";

  bool is_insertion() const { return start == end; }
  bool is_deletion() const { return start < end && replacement.empty(); }

  // Span and replacement equality; category and metadata are ignored.
  bool same_correction(const Edit& o) const {
    return start == o.start && end == o.end && replacement == o.replacement;
  }

  friend bool operator==(const Edit&, const Edit&) = default;
};

inline std::string describe(const Edit& e) {
  return "(" + std::to_string(e.start) + "," + std::to_string(e.end) + ")->\"" +
         detokenize(e.replacement) + "\"";
}

namespace detail {

inline bool edit_order(const Edit& a, const Edit& b) {
  return std::pair(a.start, a.end) < std::pair(b.start, b.end);
}

// Returns a message describing the first invariant violation, if any.
inline std::optional<std::string> check_edits(std::size_t source_len,
                                              std::span<const Edit> edits) {
  for (std::size_t k = 0; k < edits.size(); ++k) {
    const Edit& e = edits[k];
    if (e.start > e.end || e.end > source_len)
      return "edit " + describe(e) + " out of bounds for source of length " +
             std::to_string(source_len);
    if (k == 0) continue;
    const Edit& p = edits[k - 1];
    if (edit_order(e, p))
      return "edits not sorted: " + describe(p) + " before " + describe(e);
    if (p.end > e.start)
      return "edit " + describe(e) + " overlaps " + describe(p);
    if (p.is_insertion() && e.is_insertion() && p.start == e.start)
      return "two insertions at position " + std::to_string(e.start) + ": " + describe(p) +
             " and " + describe(e);
  }
  return std::nullopt;
}

}  // namespace detail

// One annotator's edits for one sentence, sorted and non-overlapping.
class AnnotationSet {
 public:
  AnnotationSet() = default;
  AnnotationSet(int annotator, std::vector<Edit> edits)
      : annotator_(annotator), edits_(std::move(edits)) {
    std::stable_sort(edits_.begin(), edits_.end(), detail::edit_order);
    for (auto& e : edits_) e.annotator = annotator_;
    if (auto err = detail::check_edits(SIZE_MAX, edits_)) throw ValidationError(*err);
  }

  int annotator() const { return annotator_; }
  std::span<const Edit> edits() const { return edits_; }
  bool empty() const { return edits_.empty(); }

  friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;

 private:
  int annotator_ = 0;
  std::vector<Edit> edits_;
};

// A source sentence with one or more annotators' gold edits.
class AnnotatedSource {
 public:
  AnnotatedSource() : annotations_{AnnotationSet{}} {}

  explicit AnnotatedSource(Sentence source)
      : source_(std::move(source)), annotations_{AnnotationSet{}} {}

  AnnotatedSource(Sentence source, std::vector<AnnotationSet> annotations)
      : source_(std::move(source)), annotations_(std::move(annotations)) {
    if (annotations_.empty()) throw ValidationError("annotated source has no annotation sets");
    std::sort(annotations_.begin(), annotations_.end(),
              [](const auto& a, const auto& b) { return a.annotator() < b.annotator(); });
    for (std::size_t k = 1; k < annotations_.size(); ++k)
      if (annotations_[k].annotator() == annotations_[k - 1].annotator())
        throw ValidationError("duplicate annotator id " +
                              std::to_string(annotations_[k].annotator()));
    for (const auto& a : annotations_)
      if (auto err = detail::check_edits(source_.size(), a.edits())) throw ValidationError(*err);
  }

  // Skips the bounds check so that raw input can be inspected with
  // validate_alignment before use. Scoring such a unit is undefined.
  static AnnotatedSource unchecked(Sentence source, std::vector<AnnotationSet> annotations) {
    AnnotatedSource unit;
    unit.source_ = std::move(source);
    unit.annotations_ = std::move(annotations);
    return unit;
  }

  const Sentence& source() const { return source_; }
  std::span<const AnnotationSet> annotations() const { return annotations_; }

  friend bool operator==(const AnnotatedSource&, const AnnotatedSource&) = default;

 private:
  Sentence source_;
  std::vector<AnnotationSet> annotations_;
};

using Corpus = std::vector<AnnotatedSource>;

// Mean of sentence scores, or a score computed from pooled statistics.
enum class AggregationMode { sentence, corpus };

// Per-sentence reference lists; every list has the same length.
class ReferenceSet {
 public:
  ReferenceSet() = default;

  explicit ReferenceSet(std::vector<std::vector<Sentence>> per_sentence)
      : refs_(std::move(per_sentence)) {
    for (std::size_t i = 0; i < refs_.size(); ++i) {
      if (refs_[i].empty())
        throw ValidationError("sentence " + std::to_string(i) + " has no references");
      if (refs_[i].size() != refs_[0].size())
        throw ValidationError("sentence " + std::to_string(i) + " has " +
                              std::to_string(refs_[i].size()) + " references, expected " +
                              std::to_string(refs_[0].size()));
    }
  }

  // Builds from reference "columns" (one file per reference), each with one
  // sentence per corpus line.
  static ReferenceSet from_columns(std::span<const std::vector<Sentence>> columns) {
    if (columns.empty()) return {};
    std::vector<std::vector<Sentence>> rows(columns[0].size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (columns[c].size() != rows.size())
        throw ValidationError("reference column " + std::to_string(c) + " has " +
                              std::to_string(columns[c].size()) + " sentences, expected " +
                              std::to_string(rows.size()));
      for (std::size_t i = 0; i < rows.size(); ++i) rows[i].push_back(columns[c][i]);
    }
    return ReferenceSet(std::move(rows));
  }

  std::size_t size() const { return refs_.size(); }
  std::size_t refs_per_sentence() const { return refs_.empty() ? 0 : refs_[0].size(); }
  std::span<const Sentence> operator[](std::size_t i) const { return refs_[i]; }

 private:
  std::vector<std::vector<Sentence>> refs_;
};

struct SystemOutput {
  std::string system_id;
  std::vector<Sentence> hypotheses;
};

// Applies sorted, non-overlapping edits to the source.
inline Sentence apply_edits(const Sentence& source, std::span<const Edit> edits) {
  if (auto err = detail::check_edits(source.size(), edits)) throw ValidationError(*err);
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (const Edit& e : edits) {
    for (; pos < e.start; ++pos) out.push_back(source[pos]);
    for (const auto& t : e.replacement) out.push_back(t);
    pos = e.end;
  }
  for (; pos < source.size(); ++pos) out.push_back(source[pos]);
  return Sentence(std::move(out));
}

// Reference sentence produced by one annotator's edits.
inline Sentence corrected(const AnnotatedSource& unit, const AnnotationSet& set) {
  return apply_edits(unit.source(), set.edits());
}

struct ValidationIssue {
  enum class Kind { size_mismatch, edit_bounds, missing_references };
  Kind kind;
  std::string message;
};

using ValidationReport = std::vector<ValidationIssue>;

// Checks sizes and edit bounds; an empty report means the inputs line up.
inline ValidationReport validate_alignment(const Corpus& corpus, const SystemOutput* output,
                                           const ReferenceSet* refs) {
  ValidationReport report;
  using K = ValidationIssue::Kind;
  if (output && output->hypotheses.size() != corpus.size())
    report.push_back({K::size_mismatch, "system '" + output->system_id + "': corpus has " +
                                            std::to_string(corpus.size()) + " sources but " +
                                            std::to_string(output->hypotheses.size()) +
                                            " hypotheses"});
  if (refs) {
    if (refs->size() != corpus.size())
      report.push_back({K::size_mismatch, "corpus has " + std::to_string(corpus.size()) +
                                              " sources but " + std::to_string(refs->size()) +
                                              " reference lists"});
    for (std::size_t i = 0; i < refs->size(); ++i)
      if ((*refs)[i].empty())
        report.push_back({K::missing_references,
                          "sentence " + std::to_string(i) + " has no references"});
  }
  for (std::size_t i = 0; i < corpus.size(); ++i)
    for (const auto& set : corpus[i].annotations())
      for (const auto& e : set.edits())
        if (e.start > e.end || e.end > corpus[i].source().size())
          report.push_back({K::edit_bounds, "sentence " + std::to_string(i) + ", annotator " +
                                                std::to_string(set.annotator()) + ": edit " +
                                                describe(e) + " exceeds source length " +
                                                std::to_string(corpus[i].source().size())});
  return report;
}

}  // namespace gecmetric
