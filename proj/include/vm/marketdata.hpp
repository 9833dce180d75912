#pragma once

#include <istream>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "vm/date.hpp"

namespace vm {

// Benchmark index levels, strictly increasing dates, positive levels.
struct PriceSeries {
  std::vector<std::pair<Date, double>> observations;
  void validate() const;
};

// Annualized percent rates (T-Bill discount basis), strictly increasing dates.
struct RateSeries {
  std::vector<std::pair<Date, double>> observations;
  void validate() const;
};

// `date,level`
PriceSeries parse_price_series(std::istream& in);
// `date,rate_percent`; FRED's "." placeholder for a missing day is skipped.
RateSeries parse_rate_series(std::istream& in);
void write_price_series(std::ostream& out, const PriceSeries& s);
void write_rate_series(std::ostream& out, const RateSeries& s);

enum class RateConversion {
  log_compound,  // ln(1 + r/100) / 4
  simple,        // ln(1 + r/400)
};

// ln(V_q / V_{q-1}) with V_q the last observation on or before the quarter's last day.
// That observation must fall inside the quarter; otherwise DomainError names the quarter.
std::vector<double> quarterly_log_market_returns(const PriceSeries& series, const QuarterGrid& grid);

// Quarterly log gross risk-free return from the rate in force at the start of each quarter.
std::vector<double> quarterly_log_riskfree(const RateSeries& series, const QuarterGrid& grid,
                                           RateConversion conversion = RateConversion::log_compound);

double quarterly_log_riskfree_rate(double annual_percent, RateConversion conversion);

struct MarketMoments {
  double mu_ln_rf = 0.0;
  double mu_ln_rm = 0.0;
  double var_ln_rm = 0.0;  // unbiased (n-1)
};

// Sample moments over aligned series of equal length >= 2.
MarketMoments market_moments(std::span<const double> ln_rm, std::span<const double> ln_rf);

// Market quantities on a quarter grid, index-aligned with the grid.
struct MarketSeries {
  QuarterGrid grid;
  std::vector<double> ln_rm;
  std::vector<double> ln_rf;
};

MarketSeries build_market_series(const PriceSeries& index, const RateSeries& tbill, const QuarterGrid& grid,
                                 RateConversion conversion = RateConversion::log_compound);

}  // namespace vm
