#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "vm/csv.hpp"
#include "vm/error.hpp"

using namespace vm;

TEST_CASE("csv reader handles quoting and reports physical lines") {
  const auto rows = csv::read(std::string_view("a,b,c\n1,\"x, y\",\"say \"\"hi\"\"\"\n\n2,\"multi\nline\",z\r\n3,,\n"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].line == 1);
  CHECK(rows[1].fields == std::vector<std::string>{"1", "x, y", "say \"hi\""});
  CHECK(rows[2].line == 4);
  CHECK(rows[2].fields[1] == "multi\nline");
  CHECK(rows[2].fields[2] == "z");
  CHECK(rows[3].line == 6);
  CHECK(rows[3].fields == std::vector<std::string>{"3", "", ""});
}

TEST_CASE("malformed csv raises a parse error with the line number") {
  try {
    csv::read(std::string_view("a,b\n1,\"open\n"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(csv::read(std::string_view("a,b\n1,x\"y\n")), ParseError);
  CHECK_THROWS_AS(csv::read(std::string_view("a,b\n1,\"x\"y\n")), ParseError);
}

TEST_CASE("escape and read are inverse") {
  const std::vector<std::string> fields{"plain", "with,comma", "with \"quote\"", "new\nline", ""};
  std::ostringstream out;
  csv::write_row(out, fields);
  const auto rows = csv::read(std::string_view(out.str()));
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].fields == fields);
}

TEST_CASE("number formatting round trips exactly") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.123456789, -2.5e17}) {
    CHECK(*csv::parse_double(csv::format_double(v)) == v);
  }
  CHECK(csv::format_double(std::numeric_limits<double>::quiet_NaN()) == "NA");
  CHECK(csv::format_fixed(34.16499, 2) == "34.16");
  CHECK(csv::format_fixed(-0.001, 2) == "0.00");
  CHECK(csv::parse_double(" +4.5 ") == 4.5);
  CHECK_FALSE(csv::parse_double("4.5x"));
  CHECK_FALSE(csv::parse_double(""));
  CHECK(csv::parse_int("12") == 12);
  CHECK_FALSE(csv::parse_int("1.5"));
}

TEST_CASE("header check is case and whitespace tolerant") {
  csv::Row header{1, {"\xEF\xBB\xBF" "Date", " level "}};
  CHECK_NOTHROW(csv::expect_header(header, {"date", "level"}, "index"));
  CHECK_THROWS_AS(csv::expect_header(csv::Row{1, {"date", "close"}}, {"date", "level"}, "index"), ParseError);
}
