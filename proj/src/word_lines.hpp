#pragma once

// Reader for the small line-oriented formats (calibration targets, costs):
// whitespace separated words, `#` starts a comment, `key=value` pairs.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "berthsim/error.hpp"

namespace berthsim::detail {

struct Word {
  std::string text;
  int col = 1;
};

struct WordLine {
  int line = 0;
  std::vector<Word> words;
};

inline std::vector<WordLine> split_word_lines(std::string_view text) {
  std::vector<WordLine> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    WordLine wl{line_no, {}};
    std::size_t i = 0;
    while (i < line.size()) {
      char c = line[i];
      if (c == '#') break;
      if (c == ' ' || c == '\t' || c == '\r') {
        ++i;
        continue;
      }
      std::size_t start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' && line[i] != '#') ++i;
      wl.words.push_back({std::string(line.substr(start, i - start)), static_cast<int>(start) + 1});
    }
    if (!wl.words.empty()) out.push_back(std::move(wl));
    if (end == text.size()) break;
    pos = end + 1;
  }
  return out;
}

/// Splits `key=value`; nullopt when there is no '='.
inline std::optional<std::pair<std::string, std::string>> split_key_value(const std::string& word) {
  auto eq = word.find('=');
  if (eq == std::string::npos || eq == 0) return std::nullopt;
  return std::make_pair(word.substr(0, eq), word.substr(eq + 1));
}

inline std::optional<double> to_real(std::string_view s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<std::uint64_t> to_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

inline Diagnostic word_error(std::string_view file, int line, int col, std::string message) {
  Diagnostic d;
  d.file = std::string(file);
  d.line = line;
  d.col = col;
  d.message = std::move(message);
  return d;
}

}  // namespace berthsim::detail
