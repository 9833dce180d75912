#include "vm/csv.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <iterator>
#include <sstream>

#include "vm/error.hpp"

namespace vm::csv {

std::vector<Row> read(std::string_view text) {
  std::vector<Row> rows;
  Row current;
  std::string field;
  std::size_t line = 1;
  std::size_t record_line = 1;
  bool in_quotes = false;
  bool after_quote = false;  // just closed a quoted field
  bool field_started = false;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    after_quote = false;
    field_started = false;
  };
  auto end_record = [&] {
    bool blank = current.fields.empty() && field.empty() && !field_started;
    if (!blank) {
      end_field();
      current.line = record_line;
      rows.push_back(std::move(current));
    }
    current = Row{};
    field.clear();
    after_quote = false;
    field_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
          after_quote = true;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case ',':
        end_field();
        field_started = true;  // a trailing comma still yields an (empty) field
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      case '"':
        if (!field.empty() || after_quote) {
          throw ParseError(line, "unexpected quote inside an unquoted field");
        }
        in_quotes = true;
        field_started = true;
        break;
      default:
        if (after_quote) throw ParseError(line, "characters after a closing quote");
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw ParseError(record_line, "unterminated quoted field");
  end_record();
  return rows;
}

std::vector<Row> read(std::istream& in) {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return read(std::string_view(text));
}

std::string escape(std::string_view field) {
  bool needs = field.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_fixed(double v, int decimals) {
  if (!std::isfinite(v)) return "NA";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
  std::string s(buf, res.ptr);
  // avoid "-0.00"
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  const char* first = t.data();
  if (*first == '+') ++first;
  double v = 0;
  auto res = std::from_chars(first, t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

std::optional<long long> parse_int(std::string_view s) {
  std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  long long v = 0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void expect_header(const Row& header, const std::vector<std::string>& expected, std::string_view what) {
  std::vector<std::string> got;
  got.reserve(header.fields.size());
  for (const auto& f : header.fields) got.push_back(lower(trim(f)));
  // tolerate a UTF-8 byte order mark on the first column
  if (!got.empty() && got[0].rfind("\xEF\xBB\xBF", 0) == 0) got[0].erase(0, 3);
  if (got != expected) {
    std::ostringstream msg;
    msg << what << " header mismatch; expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) msg << (i ? "," : "") << expected[i];
    throw ParseError(header.line, msg.str());
  }
}

}  // namespace vm::csv
