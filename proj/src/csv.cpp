#include "arise/csv.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "arise/error.hpp"

namespace arise::csv {

std::vector<Record> parse(std::string_view text, char delimiter) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  std::vector<Record> records;
  Record current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false; // distinguishes "" (empty line) from a record
  std::size_t line = 1;

  auto end_field = [&] {
    current.push_back(std::move(field));
    field.clear();
  };
  auto end_record = [&] {
    if (field_started || !current.empty()) {
      end_field();
      records.push_back(std::move(current));
      current.clear();
    }
    field_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      in_quotes = true;
      field_started = true;
    } else if (c == delimiter) {
      field_started = true;
      end_field();
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      // handled with the '\n'
    } else if (c == '\n') {
      ++line;
      end_record();
    } else {
      field_started = true;
      field.push_back(c);
    }
  }
  if (in_quotes) {
    throw ParseError(Stage::dataset,
                     "unterminated quoted field at line " + std::to_string(line));
  }
  end_record();
  return records;
}

std::vector<Record> read_file(const std::string& path, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(Stage::dataset, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), delimiter);
}

void write_record(std::ostream& out, const Record& record, char delimiter) {
  if (record.size() == 1 && record.front().empty()) {
    out << "\"\"\n"; // a bare empty line would read back as no record
    return;
  }
  for (std::size_t i = 0; i < record.size(); ++i) {
    if (i) out << delimiter;
    const std::string& f = record[i];
    const bool quote = f.find_first_of(std::string{'"', '\n', '\r', delimiter}) !=
                       std::string::npos;
    if (!quote) {
      out << f;
      continue;
    }
    out << '"';
    for (char c : f) {
      if (c == '"') out << '"';
      out << c;
    }
    out << '"';
  }
  out << '\n';
}

} // namespace arise::csv
