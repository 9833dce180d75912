#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "vm/date.hpp"
#include "vm/ingest.hpp"
#include "vm/stats.hpp"

namespace vm {

struct ReportConfig {
  std::size_t max_missing_quarters = 20;
  std::size_t min_ipos = 10;
  std::size_t geo_top = 4;
};

// Funding and PMV summaries for one sector (or the "Total" row).
struct SectorSummary {
  std::string sector;
  SummaryRow funding;
  std::optional<SummaryRow> pmv;  // absent when no round carries a PMV
};

struct SectorTrend {
  std::string sector;
  std::optional<TrendRow> funding;
  std::optional<TrendRow> pmv;
};

struct ReportTables {
  std::vector<SectorSummary> summary;  // canonical sector order, "Total" last
  TMatrix ttest_funding{};
  TMatrix ttest_pmv{};
  std::vector<SectorTrend> trends;  // sectors where at least one side survives the missing-quarter filter
  TimeToExitStats time_to_ipo;
  std::vector<GeographyShare> geography;  // sectors with funding
};

ReportTables build_report(const Dataset& data, const QuarterGrid& grid, const ReportConfig& config = {});

// `sector,n_rounds,funding_mean,funding_median,funding_total,funding_sd,pmv_n,pmv_mean,pmv_median,pmv_total,pmv_sd`
void write_summary_csv(std::ostream& out, const std::vector<SectorSummary>& rows);
// Square matrix with a leading `sector` column; NA marks undefined entries.
void write_tmatrix_csv(std::ostream& out, const TMatrix& m);
// `sector,funding_mean_pct,funding_sd_pct,pmv_mean_pct,pmv_sd_pct`
void write_trends_csv(std::ostream& out, const std::vector<SectorTrend>& rows);
// `sector,n_ipos,mean_days,sd_days,max_days,min_days,investors_mean,investors_sd`
void write_time_to_ipo_csv(std::ostream& out, const TimeToExitStats& stats);
// `org_id,days`
void write_time_to_ipo_detail_csv(std::ostream& out, const TimeToExitStats& stats);
// `sector,rank,country,share`; the residual bucket is labelled Other.
void write_geo_shares_csv(std::ostream& out, const std::vector<GeographyShare>& rows);

// All tables at two decimals.
void write_report_markdown(std::ostream& out, const ReportTables& tables);

}  // namespace vm
