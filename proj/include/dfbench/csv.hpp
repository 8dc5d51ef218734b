#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dfbench::csv {

using Row = std::vector<std::string>;

/// RFC 4180 parsing: quoted fields may contain commas, quotes ("") and newlines.
/// Accepts LF or CRLF record separators; a trailing newline is optional.
std::vector<Row> parse(std::string_view text);

/// Quotes the field only when it contains a comma, quote or line break.
std::string escape(std::string_view field);
std::string format_row(std::span<const std::string> fields);

/// Header plus rows, with column lookup by name.
struct Table {
  Row header;
  std::vector<Row> rows;

  /// Index of `name` in the header; throws ParseError if absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
};

Table parse_table(std::string_view text);
Table read_table(const std::filesystem::path& path);
std::string format_table(const Table& table);
/// Writes with LF line endings via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_text(const std::filesystem::path& path);

}  // namespace dfbench::csv
