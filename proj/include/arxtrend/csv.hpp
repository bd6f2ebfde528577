#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "arxtrend/error.hpp"

namespace arxtrend::csv {

using Row = std::vector<std::string>;

// RFC 4180 reader: quoted fields may hold commas, doubled quotes and line
// breaks. Returns nullopt at end of input.
inline std::optional<Row> read_row(std::istream& in) {
  if (in.peek() == std::char_traits<char>::eof()) return std::nullopt;
  Row row;
  std::string field;
  bool quoted = false;
  bool field_was_quoted = false;
  for (int ch; (ch = in.get()) != std::char_traits<char>::eof();) {
    char c = static_cast<char>(ch);
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          field += '"';
          in.get();
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty() && !field_was_quoted) {
      quoted = field_was_quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r' && !field_was_quoted) field.pop_back();
      row.push_back(std::move(field));
      return row;
    } else {
      field += c;
    }
  }
  if (quoted) throw UserError("unterminated quoted CSV field");
  if (!field.empty() && field.back() == '\r' && !field_was_quoted) field.pop_back();
  row.push_back(std::move(field));
  return row;
}

inline std::vector<Row> read_all(std::istream& in) {
  std::vector<Row> rows;
  while (auto r = read_row(in)) rows.push_back(std::move(*r));
  return rows;
}

inline std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void write_row(std::ostream& out, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << escape(row[i]);
  }
  out << '\n';
}

}  // namespace arxtrend::csv
