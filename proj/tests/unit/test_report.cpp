#include <doctest.h>

#include <sstream>

#include "vm/report.hpp"

using namespace vm;

namespace {

Organization org(const std::string& id, SectorSet sectors, const std::string& country) {
  Organization o;
  o.org_id = id;
  o.country = country;
  o.sectors = std::move(sectors);
  return o;
}

FundingRound round(const std::string& id, const std::string& org, const char* date, double m,
                   std::optional<double> pmv) {
  FundingRound r;
  r.round_id = id;
  r.org_id = org;
  r.date = *Date::parse(date);
  r.amount_musd = m;
  r.pmv_musd = pmv;
  r.pmv_provenance = pmv ? Provenance::observed : Provenance::missing;
  return r;
}

Dataset small() {
  return Dataset({org("a", {SectorId::Privacy, SectorId::Blockchain}, "US"), org("b", {SectorId::Privacy}, "IL"),
                  org("c", {SectorId::Blockchain}, "GB")},
                 {round("1", "a", "2015-01-10", 2, 10.0), round("2", "a", "2015-05-10", 4, std::nullopt),
                  round("3", "b", "2015-02-10", 6, 30.0), round("4", "c", "2015-08-10", 8, 40.0),
                  round("5", "b", "2015-11-10", 10, std::nullopt)},
                 {});
}

}  // namespace

TEST_CASE("report tables") {
  const QuarterGrid grid(Quarter{2015, 1}, Quarter{2015, 4});
  const auto t = build_report(small(), grid);
  REQUIRE(t.summary.size() == 3);
  CHECK(t.summary[0].sector == "Blockchain");
  CHECK(t.summary[0].funding.n == 3);
  CHECK(t.summary[1].sector == "Privacy");
  CHECK(t.summary[1].funding.n == 4);
  CHECK(t.summary[1].funding.total == doctest::Approx(22));
  CHECK(t.summary[1].pmv->n == 2);
  // the total counts each round once even when its firm sits in two sectors
  CHECK(t.summary[2].sector == "Total");
  CHECK(t.summary[2].funding.n == 5);
  CHECK(t.summary[2].funding.total == doctest::Approx(30));
  CHECK(t.summary[2].pmv->n == 3);

  const auto priv = static_cast<std::size_t>(SectorId::Privacy);
  const auto chain = static_cast<std::size_t>(SectorId::Blockchain);
  REQUIRE(t.ttest_funding[priv][chain]);
  CHECK(*t.ttest_funding[priv][chain] == doctest::Approx(-*t.ttest_funding[chain][priv]));
  CHECK(t.geography.size() == 2);
  CHECK(t.time_to_ipo.detail.empty());
}

TEST_CASE("report writers") {
  const QuarterGrid grid(Quarter{2015, 1}, Quarter{2015, 4});
  const auto t = build_report(small(), grid);
  std::ostringstream summary, matrix, trends, ipo, detail, geo, md;
  write_summary_csv(summary, t.summary);
  write_tmatrix_csv(matrix, t.ttest_funding);
  write_trends_csv(trends, t.trends);
  write_time_to_ipo_csv(ipo, t.time_to_ipo);
  write_time_to_ipo_detail_csv(detail, t.time_to_ipo);
  write_geo_shares_csv(geo, t.geography);
  write_report_markdown(md, t);
  CHECK(summary.str().rfind("sector,n_rounds,funding_mean,funding_median,funding_total,funding_sd,pmv_n,pmv_mean,"
                            "pmv_median,pmv_total,pmv_sd\n",
                            0) == 0);
  CHECK(summary.str().find("\nTotal,5,6,6,30,") != std::string::npos);
  CHECK(matrix.str().rfind("sector,Artificial Intelligence,", 0) == 0);
  CHECK(matrix.str().find("NA") != std::string::npos);
  CHECK(trends.str().rfind("sector,funding_mean_pct,funding_sd_pct,pmv_mean_pct,pmv_sd_pct\n", 0) == 0);
  CHECK(ipo.str().rfind("sector,n_ipos,mean_days,sd_days,max_days,min_days,investors_mean,investors_sd\n", 0) == 0);
  CHECK(detail.str() == "org_id,days\n");
  CHECK(geo.str().rfind("sector,rank,country,share\n", 0) == 0);
  CHECK(md.str().find("Total") != std::string::npos);
}
