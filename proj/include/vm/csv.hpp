#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace vm::csv {

struct Row {
  std::size_t line = 0;  // 1-based physical line where the record starts
  std::vector<std::string> fields;
};

// RFC 4180 reader: comma separated, double-quote quoting, quoted fields may span lines.
// Blank lines are skipped. Throws ParseError on malformed quoting.
std::vector<Row> read(std::istream& in);
std::vector<Row> read(std::string_view text);

std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Shortest representation that parses back to the same double.
std::string format_double(double v);
// Fixed-point with `decimals` digits, for human-facing tables.
std::string format_fixed(double v, int decimals);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

std::string trim(std::string_view s);
std::string lower(std::string_view s);

// Throws ParseError at line 1 if `header` is not exactly `expected`.
void expect_header(const Row& header, const std::vector<std::string>& expected, std::string_view what);

}  // namespace vm::csv
