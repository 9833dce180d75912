#include <doctest.h>

#include <cmath>
#include <sstream>

#include "vm/error.hpp"
#include "vm/random.hpp"
#include "vm/returns.hpp"

using namespace vm;

namespace {

double stake(std::initializer_list<RoundTerms> rounds, DilutionMode mode) {
  std::vector<RoundTerms> v(rounds);
  return dilution_stake(v, mode);
}

// Cap-table oracle: shares are issued at each round's implied price.
double share_count_stake(const std::vector<RoundTerms>& rounds) {
  const double founders = 1.0;
  const double price = (rounds[0].valuation - rounds[0].money) / founders;
  const double investor = rounds[0].money / price;
  double total = founders + investor;
  for (std::size_t k = 1; k < rounds.size(); ++k) {
    const double pre_money = rounds[k].valuation - rounds[k].money;
    const double p = pre_money / total;
    total += rounds[k].money / p;
  }
  return investor / total;
}

Organization org(const std::string& id, SectorSet sectors) {
  Organization o;
  o.org_id = id;
  o.sectors = std::move(sectors);
  return o;
}

FundingRound round(const std::string& id, const std::string& org, const char* date, double m,
                   std::optional<double> v) {
  FundingRound r;
  r.round_id = id;
  r.org_id = org;
  r.date = *Date::parse(date);
  r.amount_musd = m;
  r.pmv_musd = v;
  r.pmv_provenance = v ? Provenance::observed : Provenance::missing;
  return r;
}

ExitEvent exit_at(const std::string& org, const char* date, std::optional<double> value) {
  ExitEvent e;
  e.org_id = org;
  e.date = *Date::parse(date);
  e.kind = ExitKind::acquisition;
  e.exit_value_musd = value;
  e.value_provenance = value ? Provenance::observed : Provenance::imputed;
  return e;
}

}  // namespace

TEST_CASE("dilution stake examples") {
  CHECK(stake({{10, 40}}, DilutionMode::standard) == doctest::Approx(0.25));
  CHECK(stake({{10, 40}, {20, 100}}, DilutionMode::as_printed) == doctest::Approx(0.05));
  CHECK(stake({{10, 40}, {20, 100}}, DilutionMode::standard) == doctest::Approx(0.20));
  CHECK(stake({{10, 40}, {50, 60}}, DilutionMode::as_printed) < 0.0);  // recorded, not clamped
  CHECK_THROWS_AS(stake({{10, 0}}, DilutionMode::standard), DomainError);
  CHECK_THROWS_AS(stake({{10, 40}, {1, -1}}, DilutionMode::standard), DomainError);
  CHECK_THROWS_WITH_AS(stake({{50, 40}}, DilutionMode::standard), "stake exceeds 100%", DomainError);
  CHECK_THROWS_AS(stake({}, DilutionMode::standard), DomainError);
}

TEST_CASE("standard dilution matches a share-count simulation") {
  CounterRng rng(21, 0);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(5));
    std::vector<RoundTerms> rounds;
    for (int k = 0; k < n; ++k) {
      const double v = std::exp(2.0 + 3.0 * rng.uniform());
      rounds.push_back({v * rng.uniform() * 0.99, v});
    }
    const double x = dilution_stake(rounds, DilutionMode::standard);
    CHECK(x == doctest::Approx(share_count_stake(rounds)).epsilon(1e-12));
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
}

TEST_CASE("standard dilution is monotone in later money") {
  CounterRng rng(22, 0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<RoundTerms> rounds{{1.0 + rng.uniform(), 10.0 + 10.0 * rng.uniform()}};
    const double before = dilution_stake(rounds, DilutionMode::standard);
    rounds.push_back({0.0, 5.0 + 50.0 * rng.uniform()});
    CHECK(dilution_stake(rounds, DilutionMode::standard) == before);
    rounds.back().money = 0.01 + rng.uniform();
    CHECK(dilution_stake(rounds, DilutionMode::standard) < before);
  }
}

TEST_CASE("return to exit") {
  CHECK(return_to_exit(0.20, 100, 10) == doctest::Approx(1.0));
  CHECK(return_to_exit(0.05, 100, 10) == doctest::Approx(-0.5));
  CHECK(return_to_exit(0.1, 100, 10) == 0.0);
  CHECK_THROWS_AS(return_to_exit(0.1, 100, 0), DomainError);
  // full ownership without later rounds
  const double m = 37.5, vn = 81.25;
  CHECK(return_to_exit(stake({{m, m}}, DilutionMode::standard), vn, m) == (vn - m) / m);
}

TEST_CASE("daily and quarterly scaling") {
  CHECK(to_daily(1.0, 365) == doctest::Approx(0.0019008).epsilon(1e-4));
  CHECK(to_daily(0.0, 365) == 0.0);
  CHECK(to_daily(-0.5, 100) == doctest::Approx(-0.006908).epsilon(1e-3));
  CHECK(to_daily(-1.0, 100) == -1.0);
  CHECK(to_quarterly(0.0) == 0.0);
  CHECK(to_quarterly(to_daily(1.0, 365)) == doctest::Approx(0.18939).epsilon(1e-4));
  CHECK(to_quarterly(to_daily(1.0, 365)) == doctest::Approx(std::pow(2.0, 91.3125 / 365.0) - 1.0).epsilon(1e-14));
  CHECK_THROWS_AS(to_daily(0.5, 0), DomainError);
}

TEST_CASE("mode names") {
  CHECK(dilution_mode_from_string("as-printed") == DilutionMode::as_printed);
  CHECK(dilution_mode_from_string("standard") == DilutionMode::standard);
  CHECK(to_string(DilutionMode::as_printed) == "as-printed");
  CHECK_THROWS_AS(dilution_mode_from_string("fancy"), ConfigError);
}

TEST_CASE("round returns over a small dataset") {
  const Dataset data(
      {org("a", {SectorId::Privacy, SectorId::Security}), org("b", {SectorId::Privacy}), org("c", {})},
      {round("a1", "a", "2015-01-01", 10, 40), round("a2", "a", "2016-01-01", 20, 100),
       round("b1", "b", "2015-06-30", 5, std::nullopt), round("b2", "b", "2016-06-30", 5, 50),
       round("c1", "c", "2015-01-01", 10, 20)},
      {exit_at("a", "2017-01-01", 100.0), exit_at("b", "2017-03-01", 80.0), exit_at("c", "2016-01-01", 0.5)});
  const auto res = compute_round_returns(data);
  const auto& cov = res.coverage;
  CHECK(cov.exits_total == 3);
  CHECK(cov.entries_considered == 5);
  CHECK(cov.missing_pmv == 1);
  CHECK(cov.entries_used == 4);
  REQUIRE(res.returns.size() == 4);

  const auto& a1 = res.returns[0];
  CHECK(a1.round_id == "a1");
  CHECK(a1.holding_days == 731);
  CHECK(a1.R == doctest::Approx(1.0));
  CHECK(a1.r_d == doctest::Approx(std::pow(2.0, 1.0 / 731) - 1.0));
  CHECK(a1.r_q == doctest::Approx(std::pow(2.0, 91.3125 / 731) - 1.0));
  const auto& a2 = res.returns[1];
  CHECK(a2.R == doctest::Approx(0.0));

  // c: stake 0.5 of an exit worth 0.5 on 10 invested
  const auto& c1 = res.returns[3];
  CHECK(c1.R == doctest::Approx(-0.975));
  CHECK_FALSE(c1.total_loss);

  ReturnsConfig first;
  first.entry = EntryPolicy::first_round;
  CHECK(compute_round_returns(data, first).returns.size() == 2);

  const QuarterGrid grid(Quarter{2015, 1}, Quarter{2017, 4});
  const auto by_sector = sector_series(res.returns, data, grid);
  REQUIRE(by_sector.contains(SectorId::Privacy));
  REQUIRE(by_sector.contains(SectorId::Security));
  CHECK_FALSE(by_sector.contains(SectorId::Blockchain));
  const auto& privacy = by_sector.at(SectorId::Privacy);
  REQUIRE(privacy.points.size() == 1);  // both exits fall in 2017Q1; other quarters absent
  CHECK(privacy.points[0].quarter == Quarter{2017, 1});
  CHECK(privacy.points[0].count == 3);
  CHECK(privacy.points[0].mean_rq == doctest::Approx((a1.r_q + a2.r_q + res.returns[2].r_q) / 3.0));
  CHECK(by_sector.at(SectorId::Security).points[0].count == 2);

  const auto pooled = pooled_series(res.returns, grid);
  CHECK(pooled.sector == "All sectors");
  REQUIRE(pooled.points.size() == 2);
  CHECK(pooled.points[0].quarter == Quarter{2016, 1});
  CHECK(pooled.points[0].mean_rq == doctest::Approx(c1.r_q));
}

TEST_CASE("two returns in one quarter average arithmetically") {
  RoundReturn x, y;
  x.org_id = "a";
  y.org_id = "b";
  x.exit_date = y.exit_date = *Date::parse("2016-02-01");
  x.r_q = 0.1;
  y.r_q = 0.3;
  const auto s = pooled_series({x, y}, QuarterGrid(Quarter{2016, 1}, Quarter{2016, 4}));
  REQUIRE(s.points.size() == 1);
  CHECK(s.points[0].mean_rq == doctest::Approx(0.2));
}

TEST_CASE("total loss bypasses the power scaling") {
  const Dataset data({org("a", {SectorId::Privacy})},
                     {round("a1", "a", "2015-01-01", 10, 40), round("a2", "a", "2015-06-01", 50, 60)},
                     {exit_at("a", "2016-01-01", 1.0)});
  ReturnsConfig printed;
  printed.mode = DilutionMode::as_printed;
  const auto res = compute_round_returns(data, printed);
  REQUIRE_FALSE(res.returns.empty());
  CHECK(res.returns[0].total_loss);
  CHECK(res.returns[0].r_q == -1.0);
  CHECK(res.coverage.total_losses >= 1);
}

TEST_CASE("csv writers use the documented headers") {
  std::ostringstream a, b;
  write_round_returns(a, {});
  write_sector_quarterly(b, {});
  CHECK(a.str() == "org_id,round_id,entry_date,exit_date,holding_days,R,r_d,r_q,mode\n");
  CHECK(b.str() == "sector,quarter,mean_rq,count\n");
}
