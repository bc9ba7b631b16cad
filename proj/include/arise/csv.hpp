#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace arise::csv {

using Record = std::vector<std::string>;

/// RFC 4180 reader: quoted fields may contain delimiters, doubled quotes and
/// line breaks. Both LF and CRLF terminate records. A UTF-8 byte-order mark
/// at the start of the input is skipped.
std::vector<Record> parse(std::string_view text, char delimiter = ',');

std::vector<Record> read_file(const std::string& path, char delimiter = ',');

/// Writes one record, quoting only fields that need it.
void write_record(std::ostream& out, const Record& record, char delimiter = ',');

} // namespace arise::csv
