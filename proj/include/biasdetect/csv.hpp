#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace biasdetect::csv {

/// Streaming RFC-4180 reader. Quoted fields may contain separators, doubled
/// quotes and line breaks. CRLF and LF line endings are both accepted.
class Reader {
 public:
  explicit Reader(std::istream& in, char sep = ',') : in_(in), sep_(sep) {}

  /// Reads the next record into `fields`. Returns false at end of input.
  /// Sets `well_formed` to false for an unterminated quote or stray quote.
  bool next(std::vector<std::string>& fields, bool& well_formed);

  /// Physical line number of the last record's first line (1-based).
  std::size_t line() const { return record_line_; }

 private:
  std::istream& in_;
  char sep_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
};

/// Quotes a field when it contains a separator, quote or line break.
std::string escape(std::string_view field);

/// Writes one record terminated by '\n'.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace biasdetect::csv
