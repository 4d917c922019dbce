#include "biasdetect/csv.hpp"

namespace biasdetect::csv {

bool Reader::next(std::vector<std::string>& fields, bool& well_formed) {
  fields.clear();
  well_formed = true;
  std::string line;
  if (!std::getline(in_, line)) return false;
  ++line_;
  record_line_ = line_;

  std::string field;
  bool in_quotes = false;
  bool was_quoted = false;
  for (;;) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            ++i;
          } else {
            in_quotes = false;
          }
        } else {
          field += c;
        }
      } else if (c == sep_) {
        fields.push_back(std::move(field));
        field.clear();
        was_quoted = false;
      } else if (c == '"') {
        if (field.empty() && !was_quoted) {
          in_quotes = true;
          was_quoted = true;
        } else {
          well_formed = false;
          field += c;
        }
      } else {
        if (was_quoted) well_formed = false;
        field += c;
      }
    }
    if (!in_quotes) break;
    // Quoted field spans a line break.
    if (!std::getline(in_, line)) {
      well_formed = false;
      break;
    }
    ++line_;
    field += '\n';
  }
  fields.push_back(std::move(field));
  return true;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

}  // namespace biasdetect::csv
