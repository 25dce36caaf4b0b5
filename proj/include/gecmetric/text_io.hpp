#pragma once

// Line-per-sentence text files and two-column human ranking tables.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gecmetric/corpus.hpp"
#include "gecmetric/error.hpp"
#include "gecmetric/m2_format.hpp"

namespace gecmetric {

// Line i becomes sentence i. A trailing newline does not add a sentence.
inline std::vector<Sentence> read_parallel_text(std::istream& in) {
  std::vector<Sentence> out;
  std::string line;
  while (std::getline(in, line)) {
    if (out.empty()) detail::strip_bom(line);
    detail::strip_cr(line);
    out.push_back(tokenize(line));
  }
  return out;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return in;
}

inline std::vector<Sentence> read_parallel_text(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_parallel_text(in);
}

inline SystemOutput read_system_output(std::string system_id,
                                       const std::filesystem::path& path) {
  return SystemOutput{std::move(system_id), read_parallel_text(path)};
}

// Human judgments: system id -> score, higher is better.
class HumanRanking {
 public:
  void add(const std::string& system_id, double score) {
    if (!scores_.emplace(system_id, score).second)
      throw ValidationError("duplicate system id '" + system_id + "' in human ranking");
  }

  std::size_t size() const { return scores_.size(); }
  bool contains(const std::string& id) const { return scores_.count(id) != 0; }
  double at(const std::string& id) const {
    auto it = scores_.find(id);
    if (it == scores_.end()) throw ValidationError("system '" + id + "' missing from human ranking");
    return it->second;
  }
  const std::map<std::string, double>& scores() const { return scores_; }

 private:
  std::map<std::string, double> scores_;
};

inline HumanRanking read_human_ranking(std::istream& in) {
  HumanRanking ranking;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) detail::strip_bom(line);
    detail::strip_cr(line);
    if (tokenize(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw ParseError("expected two tab-separated columns", lineno);
    const std::string id = line.substr(0, tab);
    const Sentence score_field = tokenize(std::string_view(line).substr(tab + 1));
    double score = 0.0;
    bool ok = score_field.size() == 1;
    if (ok) {
      const auto& text = score_field[0];
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), score);
      ok = ec == std::errc{} && ptr == text.data() + text.size() && std::isfinite(score);
    }
    if (!ok) throw ParseError("non-numeric score '" + line.substr(tab + 1) + "'", lineno);
    if (id.empty()) throw ParseError("empty system id", lineno);
    try {
      ranking.add(id, score);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return ranking;
}

inline HumanRanking read_human_ranking(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_human_ranking(in);
}

}  // namespace gecmetric
