#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "vm/date.hpp"
#include "vm/ingest.hpp"

namespace vm {

// Descriptive statistics of one sample, values in USD mln.
struct SummaryRow {
  std::string sector;
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  double total = 0.0;
  double sd = 0.0;  // sample (n-1); 0 when n == 1
  bool sd_degenerate = false;
};

// Empty input yields nullopt (the row is omitted).
std::optional<SummaryRow> summarize(std::span<const double> values, const std::string& sector);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

// Unequal-variance two-sample t test. Both samples need n >= 2. Two zero-variance
// samples with equal means give t = 0; with different means DomainError.
WelchResult welch_t(std::span<const double> a, std::span<const double> b);

// Pooled-variance Student t statistic, same sign convention as welch_t.
double student_pooled_t(std::span<const double> a, std::span<const double> b);

// Row-vs-column Welch t statistics over the taxonomy in canonical order. Undefined
// entries (diagonal, n < 2, degenerate pairs) are nullopt.
using TMatrix = std::array<std::array<std::optional<double>, kSectorCount>, kSectorCount>;
TMatrix pairwise_matrix(const std::map<SectorId, std::vector<double>>& samples);

struct TrendRow {
  std::string sector;
  double mean_pct = 0.0;  // mean quarterly change x 4 x 100
  double sd_pct = 0.0;    // sd of quarterly changes x 2 x 100
  std::size_t changes = 0;
  std::size_t skipped_zero_base = 0;
  std::size_t missing_quarters = 0;
};

// `quarterly_means` is grid-aligned, nullopt marking quarters without observations.
// Changes are taken between adjacent quarters that both have data. Returns nullopt
// when more than `max_missing` quarters are missing or fewer than 2 are present.
std::optional<TrendRow> percent_changes(std::span<const std::optional<double>> quarterly_means,
                                        const std::string& sector, std::size_t max_missing = 20);

struct TimeToExitRow {
  std::string sector;
  std::size_t n = 0;
  std::optional<double> mean_days, sd_days, max_days, min_days;  // empty below the threshold
  double investors_mean = 0.0;
  double investors_sd = 0.0;
};

struct TimeToExitDetail {
  std::string org_id;
  int days = 0;
};

struct TimeToExitStats {
  std::vector<TimeToExitRow> rows;  // one per sector with any round, canonical order
  std::vector<TimeToExitDetail> detail;  // one per IPO firm with a recorded round
};

TimeToExitStats time_to_exit_stats(const Dataset& data, std::size_t min_ipos = 10);

struct GeographyShare {
  std::string sector;
  std::vector<std::pair<std::string, double>> top;  // country, share; descending
  double other = 0.0;
  bool has_other = false;  // more than k countries
};

GeographyShare geography_shares(const Dataset& data, SectorId sector, std::size_t k = 4);

// Funding amounts (or PMVs, where present) per sector, one observation per round;
// a round of a multi-sector firm counts in every sector.
std::map<SectorId, std::vector<double>> funding_by_sector(const Dataset& data);
std::map<SectorId, std::vector<double>> pmv_by_sector(const Dataset& data);

// Grid-aligned per-quarter mean of the given per-round values for one sector.
std::vector<std::optional<double>> quarterly_means(const Dataset& data, SectorId sector, const QuarterGrid& grid,
                                                   bool use_pmv);

}  // namespace vm
