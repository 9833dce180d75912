#include "vm/date.hpp"

#include <charconv>

#include "vm/error.hpp"

namespace vm {

namespace {

namespace chr = std::chrono;

bool parse_uint(std::string_view s, unsigned& out) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

std::string pad(unsigned v, int width) {
  std::string s = std::to_string(v);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

}  // namespace

Date Date::from_ymd(int y, unsigned m, unsigned d) {
  chr::year_month_day ymd{chr::year{y}, chr::month{m}, chr::day{d}};
  if (!ymd.ok()) {
    throw DomainError("invalid calendar date " + std::to_string(y) + "-" + std::to_string(m) + "-" +
                      std::to_string(d));
  }
  return Date(chr::sys_days{ymd});
}

std::optional<Date> Date::parse(std::string_view iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
  unsigned y = 0, m = 0, d = 0;
  if (!parse_uint(iso.substr(0, 4), y) || !parse_uint(iso.substr(5, 2), m) ||
      !parse_uint(iso.substr(8, 2), d)) {
    return std::nullopt;
  }
  chr::year_month_day ymd{chr::year{static_cast<int>(y)}, chr::month{m}, chr::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return Date(chr::sys_days{ymd});
}

Date Date::today() {
  return Date(std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now()));
}

int Date::year() const { return static_cast<int>(chr::year_month_day{days_}.year()); }
unsigned Date::month() const { return static_cast<unsigned>(chr::year_month_day{days_}.month()); }
unsigned Date::day() const { return static_cast<unsigned>(chr::year_month_day{days_}.day()); }

std::string Date::to_string() const {
  chr::year_month_day ymd{days_};
  return pad(static_cast<unsigned>(static_cast<int>(ymd.year())), 4) + "-" +
         pad(static_cast<unsigned>(ymd.month()), 2) + "-" + pad(static_cast<unsigned>(ymd.day()), 2);
}

Date feature_epoch() { return Date::from_ymd(1926, 1, 1); }

int days_since_feature_epoch(Date d) { return d - feature_epoch(); }

Quarter Quarter::of(Date d) { return Quarter{d.year(), static_cast<int>((d.month() - 1) / 3 + 1)}; }

Quarter Quarter::from_index(int index) {
  // floor division so negative indices stay well-formed
  int y = index >= 0 ? index / 4 : -((-index + 3) / 4);
  return Quarter{y, index - y * 4 + 1};
}

std::optional<Quarter> Quarter::parse(std::string_view text) {
  if (text.size() != 6 || (text[4] != 'Q' && text[4] != 'q')) return std::nullopt;
  unsigned y = 0, q = 0;
  if (!parse_uint(text.substr(0, 4), y) || !parse_uint(text.substr(5, 1), q)) return std::nullopt;
  if (q < 1 || q > 4) return std::nullopt;
  return Quarter{static_cast<int>(y), static_cast<int>(q)};
}

Date Quarter::first_day() const { return Date::from_ymd(year, static_cast<unsigned>((q - 1) * 3 + 1), 1); }

Date Quarter::last_day() const { return next().first_day().plus_days(-1); }

std::string Quarter::to_string() const { return std::to_string(year) + "Q" + std::to_string(q); }

DateWindow DateWindow::parse(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("window must look like YYYY-MM-DD:YYYY-MM-DD, got '" + std::string(text) + "'");
  }
  auto a = Date::parse(text.substr(0, colon));
  auto b = Date::parse(text.substr(colon + 1));
  if (!a || !b) throw ConfigError("window has an invalid date: '" + std::string(text) + "'");
  if (*b < *a) throw ConfigError("window end precedes start: '" + std::string(text) + "'");
  return DateWindow{*a, *b};
}

std::string DateWindow::to_string() const { return start.to_string() + ":" + end.to_string(); }

QuarterGrid::QuarterGrid(Quarter first, Quarter last) : first_(first), last_(last) {
  if (last < first) throw DomainError("quarter grid end precedes start");
}

QuarterGrid QuarterGrid::covering(const DateWindow& window) {
  return QuarterGrid(Quarter::of(window.start), Quarter::of(window.end));
}

std::vector<Quarter> QuarterGrid::quarters() const {
  std::vector<Quarter> out;
  out.reserve(size());
  for (int i = first_.index(); i <= last_.index(); ++i) out.push_back(Quarter::from_index(i));
  return out;
}

}  // namespace vm
