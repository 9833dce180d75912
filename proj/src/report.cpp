#include "vm/report.hpp"

#include "vm/csv.hpp"

namespace vm {

namespace {

std::string num(double v) { return csv::format_double(v); }
std::string opt(const std::optional<double>& v) { return v ? csv::format_double(*v) : "NA"; }
std::string f2(double v) { return csv::format_fixed(v, 2); }
std::string f2(const std::optional<double>& v) { return v ? csv::format_fixed(*v, 2) : "NA"; }

const std::vector<double>& or_empty(const std::map<SectorId, std::vector<double>>& m, SectorId s) {
  static const std::vector<double> empty;
  auto it = m.find(s);
  return it == m.end() ? empty : it->second;
}

void markdown_tmatrix(std::ostream& out, const TMatrix& m) {
  // only sectors with at least one defined entry, to keep the table readable
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < kSectorCount; ++r) {
    for (std::size_t c = 0; c < kSectorCount; ++c) {
      if (m[r][c]) {
        keep.push_back(r);
        break;
      }
    }
  }
  if (keep.empty()) {
    out << "Not enough sectors with two or more observations.\n";
    return;
  }
  out << "| |";
  for (auto c : keep) out << " " << sector_name(all_sectors()[c]) << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < keep.size(); ++i) out << "---|";
  out << "\n";
  for (auto r : keep) {
    out << "| " << sector_name(all_sectors()[r]) << " |";
    for (auto c : keep) out << " " << (r == c ? std::string() : f2(m[r][c])) << " |";
    out << "\n";
  }
}

}  // namespace

ReportTables build_report(const Dataset& data, const QuarterGrid& grid, const ReportConfig& config) {
  ReportTables t;
  const auto funding = funding_by_sector(data);
  const auto pmv = pmv_by_sector(data);

  for (SectorId s : all_sectors()) {
    const std::string name(sector_name(s));
    auto f = summarize(or_empty(funding, s), name);
    if (!f) continue;
    t.summary.push_back({name, *f, summarize(or_empty(pmv, s), name)});
  }
  std::vector<double> all_funding, all_pmv;
  for (const auto& r : data.rounds()) {
    all_funding.push_back(r.amount_musd);
    if (r.pmv_musd) all_pmv.push_back(*r.pmv_musd);
  }
  if (auto f = summarize(all_funding, "Total")) t.summary.push_back({"Total", *f, summarize(all_pmv, "Total")});

  t.ttest_funding = pairwise_matrix(funding);
  t.ttest_pmv = pairwise_matrix(pmv);

  for (SectorId s : all_sectors()) {
    const std::string name(sector_name(s));
    const auto fm = quarterly_means(data, s, grid, false);
    const auto pm = quarterly_means(data, s, grid, true);
    SectorTrend row{name, percent_changes(fm, name, config.max_missing_quarters),
                    percent_changes(pm, name, config.max_missing_quarters)};
    if (row.funding || row.pmv) t.trends.push_back(std::move(row));
  }

  t.time_to_ipo = time_to_exit_stats(data, config.min_ipos);

  for (SectorId s : all_sectors()) {
    if (or_empty(funding, s).empty()) continue;
    auto g = geography_shares(data, s, config.geo_top);
    if (!g.top.empty()) t.geography.push_back(std::move(g));
  }
  return t;
}

void write_summary_csv(std::ostream& out, const std::vector<SectorSummary>& rows) {
  csv::write_row(out, {"sector", "n_rounds", "funding_mean", "funding_median", "funding_total", "funding_sd", "pmv_n",
                       "pmv_mean", "pmv_median", "pmv_total", "pmv_sd"});
  for (const auto& r : rows) {
    std::vector<std::string> fields{r.sector,          std::to_string(r.funding.n), num(r.funding.mean),
                                    num(r.funding.median), num(r.funding.total),  num(r.funding.sd)};
    if (r.pmv) {
      fields.insert(fields.end(), {std::to_string(r.pmv->n), num(r.pmv->mean), num(r.pmv->median),
                                   num(r.pmv->total), num(r.pmv->sd)});
    } else {
      fields.insert(fields.end(), {"0", "NA", "NA", "NA", "NA"});
    }
    csv::write_row(out, fields);
  }
}

void write_tmatrix_csv(std::ostream& out, const TMatrix& m) {
  std::vector<std::string> header{"sector"};
  for (SectorId s : all_sectors()) header.emplace_back(sector_name(s));
  csv::write_row(out, header);
  for (std::size_t r = 0; r < kSectorCount; ++r) {
    std::vector<std::string> row{std::string(sector_name(all_sectors()[r]))};
    for (std::size_t c = 0; c < kSectorCount; ++c) row.push_back(opt(m[r][c]));
    csv::write_row(out, row);
  }
}

void write_trends_csv(std::ostream& out, const std::vector<SectorTrend>& rows) {
  csv::write_row(out, {"sector", "funding_mean_pct", "funding_sd_pct", "pmv_mean_pct", "pmv_sd_pct"});
  for (const auto& r : rows) {
    csv::write_row(out, {r.sector, r.funding ? num(r.funding->mean_pct) : "NA",
                         r.funding ? num(r.funding->sd_pct) : "NA", r.pmv ? num(r.pmv->mean_pct) : "NA",
                         r.pmv ? num(r.pmv->sd_pct) : "NA"});
  }
}

void write_time_to_ipo_csv(std::ostream& out, const TimeToExitStats& stats) {
  csv::write_row(out, {"sector", "n_ipos", "mean_days", "sd_days", "max_days", "min_days", "investors_mean",
                       "investors_sd"});
  for (const auto& r : stats.rows) {
    csv::write_row(out, {r.sector, std::to_string(r.n), opt(r.mean_days), opt(r.sd_days), opt(r.max_days),
                         opt(r.min_days), num(r.investors_mean), num(r.investors_sd)});
  }
}

void write_time_to_ipo_detail_csv(std::ostream& out, const TimeToExitStats& stats) {
  csv::write_row(out, {"org_id", "days"});
  for (const auto& d : stats.detail) csv::write_row(out, {d.org_id, std::to_string(d.days)});
}

void write_geo_shares_csv(std::ostream& out, const std::vector<GeographyShare>& rows) {
  csv::write_row(out, {"sector", "rank", "country", "share"});
  for (const auto& g : rows) {
    std::size_t rank = 0;
    for (const auto& [country, share] : g.top) csv::write_row(out, {g.sector, std::to_string(++rank), country, num(share)});
    if (g.has_other) csv::write_row(out, {g.sector, std::to_string(++rank), "Other", num(g.other)});
  }
}

void write_report_markdown(std::ostream& out, const ReportTables& t) {
  out << "# Descriptive report\n\n## Funding and post-money valuations (USD mln)\n\n";
  out << "| Sector | Rounds | Mean | Median | Total | SD | PMV n | PMV mean | PMV median | PMV total | PMV SD |\n";
  out << "|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : t.summary) {
    out << "| " << r.sector << " | " << r.funding.n << " | " << f2(r.funding.mean) << " | " << f2(r.funding.median)
        << " | " << f2(r.funding.total) << " | " << f2(r.funding.sd) << " | ";
    if (r.pmv) {
      out << r.pmv->n << " | " << f2(r.pmv->mean) << " | " << f2(r.pmv->median) << " | " << f2(r.pmv->total)
          << " | " << f2(r.pmv->sd) << " |\n";
    } else {
      out << "0 | NA | NA | NA | NA |\n";
    }
  }

  out << "\n## Welch t statistics, funding amounts (row vs column)\n\n";
  markdown_tmatrix(out, t.ttest_funding);
  out << "\n## Welch t statistics, post-money valuations (row vs column)\n\n";
  markdown_tmatrix(out, t.ttest_pmv);

  out << "\n## Annualized quarterly percent changes\n\n";
  out << "| Sector | Funding mean | Funding SD | PMV mean | PMV SD |\n|---|---|---|---|---|\n";
  for (const auto& r : t.trends) {
    out << "| " << r.sector << " | " << (r.funding ? f2(r.funding->mean_pct) : "NA") << " | "
        << (r.funding ? f2(r.funding->sd_pct) : "NA") << " | " << (r.pmv ? f2(r.pmv->mean_pct) : "NA") << " | "
        << (r.pmv ? f2(r.pmv->sd_pct) : "NA") << " |\n";
  }

  out << "\n## Time to IPO (days)\n\n";
  out << "| Sector | IPOs | Mean | SD | Max | Min | Investors mean | Investors SD |\n|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : t.time_to_ipo.rows) {
    out << "| " << r.sector << " | " << r.n << " | " << f2(r.mean_days) << " | " << f2(r.sd_days) << " | "
        << f2(r.max_days) << " | " << f2(r.min_days) << " | " << f2(r.investors_mean) << " | " << f2(r.investors_sd)
        << " |\n";
  }

  out << "\n## Funding share by country\n\n| Sector | Country | Share (%) |\n|---|---|---|\n";
  for (const auto& g : t.geography) {
    for (const auto& [country, share] : g.top) out << "| " << g.sector << " | " << country << " | " << f2(share * 100.0) << " |\n";
    if (g.has_other) out << "| " << g.sector << " | Other | " << f2(g.other * 100.0) << " |\n";
  }
}

}  // namespace vm
