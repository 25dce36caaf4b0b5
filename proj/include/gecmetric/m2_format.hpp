#pragma once

// Reader and writer for the M2 gold annotation format:
//
//   S <space-joined source tokens>
//   A <start> <end>|||<type>|||<correction>|||<required>|||<comment>|||<annotator>
//   ...
//   <blank line>
//
// A `noop` line with correction `-NONE-` records an annotator who made no
// edits; it yields an empty AnnotationSet for that annotator.

#include <charconv>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gecmetric/corpus.hpp"
#include "gecmetric/error.hpp"

namespace gecmetric {

using M2Document = std::vector<AnnotatedSource>;

namespace detail {

inline void strip_bom(std::string& line) {
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
}

inline void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

inline std::vector<std::string_view> split_fields(std::string_view s, std::string_view sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + sep.size();
  }
}

inline bool parse_int(std::string_view s, long long& out) {
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

struct PendingUnit {
  Sentence source;
  std::map<int, std::vector<Edit>> by_annotator;
  std::size_t line = 0;
};

inline AnnotatedSource finish_unit(PendingUnit& unit) {
  std::vector<AnnotationSet> sets;
  if (unit.by_annotator.empty()) sets.emplace_back(0, std::vector<Edit>{});
  for (auto& [id, edits] : unit.by_annotator) {
    try {
      sets.emplace_back(id, std::move(edits));
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), unit.line);
    }
  }
  try {
    return AnnotatedSource(std::move(unit.source), std::move(sets));
  } catch (const ValidationError& e) {
    throw ParseError(e.what(), unit.line);
  }
}

}  // namespace detail

inline M2Document parse_m2(std::istream& in) {
  M2Document doc;
  std::optional<detail::PendingUnit> unit;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) detail::strip_bom(line);
    detail::strip_cr(line);
    if (tokenize(line).empty()) {
      if (unit) doc.push_back(detail::finish_unit(*unit));
      unit.reset();
      continue;
    }
    if (line.size() >= 2 && line[0] == 'S' && line[1] == ' ') {
      if (unit) doc.push_back(detail::finish_unit(*unit));
      unit.emplace();
      unit->source = tokenize(std::string_view(line).substr(2));
      unit->line = lineno;
      continue;
    }
    if (line == "S") {
      if (unit) doc.push_back(detail::finish_unit(*unit));
      unit.emplace();
      unit->line = lineno;
      continue;
    }
    if (line.size() >= 2 && line[0] == 'A' && line[1] == ' ') {
      if (!unit) throw ParseError("annotation line before any source line", lineno);
      const auto fields = detail::split_fields(std::string_view(line).substr(2), "|||");
      if (fields.size() != 6)
        throw ParseError("expected 6 '|||'-separated fields, found " +
                             std::to_string(fields.size()),
                         lineno);
      const Sentence span = tokenize(fields[0]);
      long long start = 0, end = 0, annotator = 0;
      if (span.size() != 2 || !detail::parse_int(span[0], start) ||
          !detail::parse_int(span[1], end))
        throw ParseError("malformed span '" + std::string(fields[0]) + "'", lineno);
      const Sentence annotator_field = tokenize(fields[5]);
      if (annotator_field.size() != 1 || !detail::parse_int(annotator_field[0], annotator))
        throw ParseError("malformed annotator id '" + std::string(fields[5]) + "'", lineno);
      const std::string category(fields[1]);
      const std::string correction(fields[2]);
      auto& edits = unit->by_annotator[static_cast<int>(annotator)];
      if (category == "noop" || (correction == "-NONE-" && start == -1 && end == -1)) continue;
      if (start < 0 || end < start || static_cast<std::size_t>(end) > unit->source.size())
        throw ParseError("edit span (" + std::to_string(start) + "," + std::to_string(end) +
                             ") out of bounds for source of length " +
                             std::to_string(unit->source.size()),
                         lineno);
      Edit e;
      e.start = static_cast<std::size_t>(start);
      e.end = static_cast<std::size_t>(end);
      e.replacement = correction == "-NONE-" ? Sentence{} : tokenize(correction);
      e.category = category;
      e.required = std::string(fields[3]);
      e.comment = std::string(fields[4]);
      e.annotator = static_cast<int>(annotator);
      edits.push_back(std::move(e));
      continue;
    }
    throw ParseError("unrecognized line (expected 'S ' or 'A ')", lineno);
  }
  if (unit) doc.push_back(detail::finish_unit(*unit));
  return doc;
}

inline M2Document parse_m2(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_m2(in);
}

inline void serialize_m2(const M2Document& doc, std::ostream& out) {
  for (const auto& unit : doc) {
    out << "S " << detokenize(unit.source()) << '\n';
    const auto sets = unit.annotations();
    const bool implicit_empty = sets.size() == 1 && sets[0].annotator() == 0 && sets[0].empty();
    for (const auto& set : sets) {
      if (set.empty()) {
        if (!implicit_empty)
          out << "A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||" << set.annotator() << '\n';
        continue;
      }
      for (const auto& e : set.edits())
        out << "A " << e.start << ' ' << e.end << "|||" << e.category << "|||"
            << detokenize(e.replacement) << "|||" << e.required << "|||" << e.comment << "|||"
            << set.annotator() << '\n';
    }
    out << '\n';
  }
}

inline std::string serialize_m2(const M2Document& doc) {
  std::ostringstream out;
  serialize_m2(doc, out);
  return out.str();
}

}  // namespace gecmetric
