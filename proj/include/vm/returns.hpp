#pragma once

#include <cstddef>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "vm/date.hpp"
#include "vm/ingest.hpp"

namespace vm {

enum class DilutionMode {
  standard,    // later rounds scale the stake by (v_k - m_k) / v_k
  as_printed,  // numerator uses the previous round's valuation: (v_{k-1} - m_k) / v_k
};

std::string_view to_string(DilutionMode m);
DilutionMode dilution_mode_from_string(std::string_view s);

struct RoundTerms {
  double money = 0.0;      // m_k
  double valuation = 0.0;  // post-money v_k
};

// Stake at exit of an investor who entered at cascade.front(). Later entries are the
// subsequent rounds up to the exit, in order. May be negative in as_printed mode.
double dilution_stake(std::span<const RoundTerms> cascade, DilutionMode mode);

// (v_n x - m) / m
double return_to_exit(double stake, double exit_value, double money);

// (1 + R)^(1/days) - 1; R <= -1 maps to -1 (total loss).
double to_daily(double total_return, double holding_days);
// (1 + r_d)^days_per_quarter - 1
double to_quarterly(double daily_rate, double days_per_quarter = 365.25 / 4.0);

struct RoundReturn {
  std::string org_id;
  std::string round_id;
  Date entry_date;
  Date exit_date;
  int holding_days = 0;
  double R = 0.0;
  double r_d = 0.0;
  double r_q = 0.0;
  DilutionMode mode = DilutionMode::standard;
  bool total_loss = false;
};

enum class EntryPolicy { every_round, first_round };

struct ReturnsConfig {
  DilutionMode mode = DilutionMode::standard;
  double days_per_quarter = 365.25 / 4.0;
  EntryPolicy entry = EntryPolicy::every_round;
};

struct CoverageReport {
  std::size_t exits_total = 0;
  std::size_t exits_without_value = 0;
  std::size_t exits_without_rounds = 0;
  std::size_t entries_considered = 0;
  std::size_t entries_used = 0;
  std::size_t missing_pmv = 0;         // entry or later round still lacks a PMV
  std::size_t zero_amount = 0;         // entry round raised nothing
  std::size_t stake_over_100pct = 0;   // m_i > v_i
  std::size_t non_positive_holding = 0;
  std::size_t total_losses = 0;
};

struct ReturnsResult {
  std::vector<RoundReturn> returns;  // ordered by (org_id, entry_date, round_id)
  CoverageReport coverage;
};

ReturnsResult compute_round_returns(const Dataset& data, const ReturnsConfig& config = {});

struct QuarterPoint {
  Quarter quarter;
  double mean_rq = 0.0;
  std::size_t count = 0;
};

// Quarters without exits are absent rather than zero-filled.
struct QuarterlySectorSeries {
  std::string sector;
  std::vector<QuarterPoint> points;  // increasing quarters
};

// Mean r_q per (sector, exit quarter). A firm in several sectors feeds each of them.
// Returns whose exit quarter lies outside the grid are ignored.
std::map<SectorId, QuarterlySectorSeries> sector_series(const std::vector<RoundReturn>& returns, const Dataset& data,
                                                        const QuarterGrid& grid);

// Every return pooled once, labelled "All sectors".
QuarterlySectorSeries pooled_series(const std::vector<RoundReturn>& returns, const QuarterGrid& grid,
                                    const std::string& label = "All sectors");

void write_round_returns(std::ostream& out, const std::vector<RoundReturn>& returns);
void write_sector_quarterly(std::ostream& out, const std::vector<QuarterlySectorSeries>& series);

}  // namespace vm
