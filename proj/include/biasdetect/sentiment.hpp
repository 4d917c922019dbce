#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace biasdetect {

/// Term polarities plus the negator set used by the scorer.
struct Lexicon {
  std::unordered_map<std::string, double> entries;
  std::set<std::string> negators;
  /// Number of duplicate term rows seen while loading (last row wins).
  std::size_t duplicate_warnings = 0;

  bool is_negator(std::string_view token) const;
  /// Polarity of `token`, or 0 when it is not in the lexicon.
  double polarity(std::string_view token) const;
};

/// Tokens of one sentence, lowercased.
using Sentence = std::vector<std::string>;

/// Reads a TSV lexicon: `term<TAB>polarity[<TAB>NEG]`. Blank lines and lines
/// starting with '#' are ignored. Throws Error naming the line on a
/// non-numeric polarity or a term containing whitespace.
Lexicon load_lexicon(const std::filesystem::path& path);
Lexicon parse_lexicon(std::string_view contents);

/// Splits on runs of [.!?] into sentences and on non-alphanumeric runs into
/// tokens. Bytes >= 0x80 are kept inside tokens so UTF-8 words survive.
std::vector<Sentence> tokenize(std::string_view text);

/// Number of preceding tokens searched for a negator.
inline constexpr std::size_t kNegationWindow = 4;

/// Lexicon score of a text.
///
/// Each sentence of n tokens scores sum(polarity * flip) / sqrt(n), where
/// flip is -1 when a negator occurs among the kNegationWindow tokens before
/// the polarized token. The text score is the mean over sentences; empty
/// text scores 0.
double score_text(std::string_view text, const Lexicon& lexicon);

}  // namespace biasdetect
