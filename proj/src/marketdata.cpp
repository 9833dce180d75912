#include "vm/marketdata.hpp"

#include <algorithm>
#include <cmath>

#include "vm/csv.hpp"
#include "vm/error.hpp"

namespace vm {

namespace {

template <class Series>
void check_increasing(const Series& s, const char* what) {
  for (std::size_t i = 1; i < s.observations.size(); ++i) {
    if (!(s.observations[i - 1].first < s.observations[i].first)) {
      throw DomainError(std::string(what) + " dates must be strictly increasing at " +
                        s.observations[i].first.to_string());
    }
  }
}

std::vector<std::pair<Date, double>> parse_dated_values(std::istream& in, const std::vector<std::string>& header,
                                                        const char* what, bool allow_placeholder) {
  auto rows = csv::read(in);
  if (rows.empty()) throw ParseError(1, std::string(what) + " file is empty");
  csv::expect_header(rows.front(), header, what);
  std::vector<std::pair<Date, double>> obs;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.fields.size() != 2) throw ParseError(row.line, "expected 2 fields");
    auto date = Date::parse(csv::trim(row.fields[0]));
    if (!date) throw ParseError(row.line, "invalid date '" + row.fields[0] + "'");
    std::string value = csv::trim(row.fields[1]);
    if (allow_placeholder && value == ".") continue;
    auto v = csv::parse_double(value);
    if (!v || !std::isfinite(*v)) throw ParseError(row.line, "invalid value '" + row.fields[1] + "'");
    obs.emplace_back(*date, *v);
  }
  return obs;
}

// Last observation dated on or before `d`, or nullptr.
const std::pair<Date, double>* last_on_or_before(const std::vector<std::pair<Date, double>>& obs, Date d) {
  auto it = std::upper_bound(obs.begin(), obs.end(), d,
                             [](Date value, const std::pair<Date, double>& o) { return value < o.first; });
  if (it == obs.begin()) return nullptr;
  return &*std::prev(it);
}

double quarter_end_level(const PriceSeries& s, Quarter q) {
  const auto* o = last_on_or_before(s.observations, q.last_day());
  if (!o || o->first < q.first_day()) {
    throw DomainError("no index observation in quarter " + q.to_string());
  }
  return o->second;
}

}  // namespace

void PriceSeries::validate() const {
  check_increasing(*this, "index");
  for (const auto& [d, level] : observations) {
    if (!(level > 0) || !std::isfinite(level)) {
      throw DomainError("index level must be positive at " + d.to_string());
    }
  }
}

void RateSeries::validate() const {
  check_increasing(*this, "rate");
  for (const auto& [d, r] : observations) {
    if (!std::isfinite(r)) throw DomainError("rate must be finite at " + d.to_string());
  }
}

PriceSeries parse_price_series(std::istream& in) {
  PriceSeries s{parse_dated_values(in, {"date", "level"}, "index", false)};
  s.validate();
  return s;
}

RateSeries parse_rate_series(std::istream& in) {
  RateSeries s{parse_dated_values(in, {"date", "rate_percent"}, "rate", true)};
  s.validate();
  return s;
}

void write_price_series(std::ostream& out, const PriceSeries& s) {
  csv::write_row(out, {"date", "level"});
  for (const auto& [d, v] : s.observations) csv::write_row(out, {d.to_string(), csv::format_double(v)});
}

void write_rate_series(std::ostream& out, const RateSeries& s) {
  csv::write_row(out, {"date", "rate_percent"});
  for (const auto& [d, v] : s.observations) csv::write_row(out, {d.to_string(), csv::format_double(v)});
}

std::vector<double> quarterly_log_market_returns(const PriceSeries& series, const QuarterGrid& grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  double prev = quarter_end_level(series, grid.first().prev());
  for (Quarter q : grid.quarters()) {
    double level = quarter_end_level(series, q);
    out.push_back(std::log(level / prev));
    prev = level;
  }
  return out;
}

double quarterly_log_riskfree_rate(double annual_percent, RateConversion conversion) {
  switch (conversion) {
    case RateConversion::log_compound: return std::log1p(annual_percent / 100.0) / 4.0;
    case RateConversion::simple: return std::log1p(annual_percent / 400.0);
  }
  return 0.0;
}

std::vector<double> quarterly_log_riskfree(const RateSeries& series, const QuarterGrid& grid,
                                           RateConversion conversion) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (Quarter q : grid.quarters()) {
    const auto* o = last_on_or_before(series.observations, q.first_day());
    if (!o) throw DomainError("no risk-free observation on or before the start of quarter " + q.to_string());
    out.push_back(quarterly_log_riskfree_rate(o->second, conversion));
  }
  return out;
}

MarketMoments market_moments(std::span<const double> ln_rm, std::span<const double> ln_rf) {
  if (ln_rm.size() != ln_rf.size()) throw DomainError("market moment series must be aligned");
  const std::size_t n = ln_rm.size();
  if (n < 2) throw InsufficientData("market moments need at least 2 quarters, got " + std::to_string(n));
  MarketMoments m;
  for (std::size_t i = 0; i < n; ++i) {
    m.mu_ln_rm += ln_rm[i];
    m.mu_ln_rf += ln_rf[i];
  }
  m.mu_ln_rm /= static_cast<double>(n);
  m.mu_ln_rf /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : ln_rm) ss += (x - m.mu_ln_rm) * (x - m.mu_ln_rm);
  m.var_ln_rm = ss / static_cast<double>(n - 1);
  return m;
}

MarketSeries build_market_series(const PriceSeries& index, const RateSeries& tbill, const QuarterGrid& grid,
                                 RateConversion conversion) {
  return MarketSeries{grid, quarterly_log_market_returns(index, grid), quarterly_log_riskfree(tbill, grid, conversion)};
}

}  // namespace vm
