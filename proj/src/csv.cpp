#include "aerodesign/csv.hpp"

#include "aerodesign/error.hpp"

namespace aerodesign::csv {

std::vector<Record> parse(std::string_view text) {
  std::vector<Record> records;
  std::size_t pos = 0;
  std::size_t line = 1;
  const std::size_t n = text.size();

  while (pos < n) {
    Record rec;
    rec.line = line;
    const std::size_t start = pos;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool done = false;
    std::size_t end = n;

    while (pos < n && !done) {
      const char c = text[pos];
      if (in_quotes) {
        if (c == '"') {
          if (pos + 1 < n && text[pos + 1] == '"') {
            field.push_back('"');
            pos += 2;
          } else {
            in_quotes = false;
            ++pos;
          }
        } else {
          if (c == '\n') ++line;
          field.push_back(c);
          ++pos;
        }
        continue;
      }
      switch (c) {
        case '"':
          if (!field.empty() || field_was_quoted) {
            throw Error(errc::csv_malformed,
                        "stray quote in unquoted field at line " + std::to_string(line));
          }
          in_quotes = true;
          field_was_quoted = true;
          ++pos;
          break;
        case ',':
          rec.fields.push_back(std::move(field));
          field.clear();
          field_was_quoted = false;
          ++pos;
          break;
        case '\r':
          if (pos + 1 < n && text[pos + 1] == '\n') {
            end = pos;
            pos += 2;
            ++line;
            done = true;
          } else {
            field.push_back(c);
            ++pos;
          }
          break;
        case '\n':
          end = pos;
          ++pos;
          ++line;
          done = true;
          break;
        default:
          if (field_was_quoted) {
            throw Error(errc::csv_malformed,
                        "characters after closing quote at line " + std::to_string(line));
          }
          field.push_back(c);
          ++pos;
      }
    }
    if (in_quotes) {
      throw Error(errc::csv_malformed,
                  "unterminated quoted field starting at line " + std::to_string(rec.line));
    }
    if (!done) end = n;
    rec.fields.push_back(std::move(field));
    rec.raw = std::string(text.substr(start, end - start));
    // A blank line is not a record.
    if (!(rec.fields.size() == 1 && rec.fields[0].empty() && !field_was_quoted)) {
      records.push_back(std::move(rec));
    }
  }
  return records;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_row(const Row& row) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(row[i]);
  }
  return out;
}

}  // namespace aerodesign::csv
