#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace aerodesign::csv {

using Row = std::vector<std::string>;

struct Record {
  Row fields;
  std::string raw;  // exact source text of the record, without its line terminator
  std::size_t line = 0;  // 1-based line where the record starts
};

// RFC-4180 reader. Accepts LF or CRLF terminators and quoted fields spanning
// lines. Throws Error(csv.malformed) on an unterminated quote or a stray
// quote inside an unquoted field.
std::vector<Record> parse(std::string_view text);

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);
std::string format_row(const Row& row);

}  // namespace aerodesign::csv
