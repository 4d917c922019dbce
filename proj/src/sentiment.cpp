#include "biasdetect/sentiment.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "biasdetect/error.hpp"
#include "biasdetect/io.hpp"

namespace biasdetect {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

bool Lexicon::is_negator(std::string_view token) const {
  return negators.find(std::string(token)) != negators.end();
}

double Lexicon::polarity(std::string_view token) const {
  auto it = entries.find(std::string(token));
  return it == entries.end() ? 0.0 : it->second;
}

Lexicon parse_lexicon(std::string_view contents) {
  Lexicon lex;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t eol = contents.find('\n', pos);
    if (eol == std::string_view::npos) eol = contents.size();
    std::string_view line = contents.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || line.front() == '#') continue;

    std::vector<std::string_view> cols;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      cols.push_back(trim(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start)));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    const auto where = "lexicon line " + std::to_string(line_no);
    if (cols.size() < 2) throw Error(where + ": expected term<TAB>polarity");
    std::string term;
    for (char c : cols[0]) term += lower(c);
    if (term.empty() || term.find_first_of(" \t\v\f") != std::string::npos) {
      throw Error(where + ": invalid term '" + std::string(cols[0]) + "'");
    }
    double polarity = 0;
    const auto* first = cols[1].data();
    const auto* last = first + cols[1].size();
    auto [ptr, ec] = std::from_chars(first, last, polarity);
    if (cols[1].empty() || ec != std::errc{} || ptr != last || !std::isfinite(polarity)) {
      throw Error(where + ": non-numeric polarity '" + std::string(cols[1]) + "'");
    }
    const bool negator = cols.size() >= 3 && cols[2] == "NEG";
    if (lex.entries.count(term) || lex.negators.count(term)) ++lex.duplicate_warnings;
    lex.entries[term] = polarity;
    if (negator) {
      lex.negators.insert(term);
    } else {
      lex.negators.erase(term);
    }
  }
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) { return parse_lexicon(read_file(path)); }

std::vector<Sentence> tokenize(std::string_view text) {
  std::vector<Sentence> sentences;
  Sentence current;
  std::string token;
  auto flush_token = [&] {
    if (!token.empty()) current.push_back(std::move(token));
    token.clear();
  };
  auto flush_sentence = [&] {
    flush_token();
    if (!current.empty()) sentences.push_back(std::move(current));
    current.clear();
  };
  for (char c : text) {
    if (is_word_byte(static_cast<unsigned char>(c))) {
      token += lower(c);
    } else if (is_terminator(c)) {
      flush_sentence();
    } else {
      flush_token();
    }
  }
  flush_sentence();
  return sentences;
}

double score_text(std::string_view text, const Lexicon& lexicon) {
  const auto sentences = tokenize(text);
  if (sentences.empty()) return 0.0;
  double total = 0.0;
  for (const auto& sentence : sentences) {
    double raw = 0.0;
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      const double p = lexicon.polarity(sentence[i]);
      if (p == 0.0) continue;
      bool negated = false;
      const std::size_t from = i >= kNegationWindow ? i - kNegationWindow : 0;
      for (std::size_t j = from; j < i && !negated; ++j) negated = lexicon.is_negator(sentence[j]);
      raw += negated ? -p : p;
    }
    total += raw / std::sqrt(static_cast<double>(sentence.size()));
  }
  return total / static_cast<double>(sentences.size());
}

}  // namespace biasdetect
