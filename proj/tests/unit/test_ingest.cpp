#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "vm/error.hpp"
#include "vm/ingest.hpp"
#include "vm/random.hpp"

using namespace vm;

namespace {

Parsed<Organization> orgs_from(const std::string& text) {
  std::istringstream in(text);
  return parse_organizations(in);
}

Parsed<FundingRound> rounds_from(const std::string& text, const ParseContext& ctx = {}) {
  std::istringstream in(text);
  return parse_funding_rounds(in, ctx);
}

Parsed<ExitEvent> exits_from(const std::string& text, const ParseContext& ctx = {}) {
  std::istringstream in(text);
  return parse_exits(in, ctx);
}

const std::string kOrgs = "org_id,name,country_code,tags\n";
const std::string kRounds =
    "round_id,org_id,date,amount_musd,pmv_musd,investor_count,lead_investor_rank,round_type\n";
const std::string kExits = "org_id,date,kind,exit_value_musd\n";

}  // namespace

TEST_CASE("organizations map tags onto the taxonomy") {
  auto p = orgs_from(kOrgs + "o1,Acme,US,\"cyber security;fintech\"\no2,Beta,IL,ai\n");
  REQUIRE(p.records.size() == 2);
  CHECK(p.records[0].sectors == SectorSet{SectorId::CyberSecurity});
  CHECK(p.records[0].tags == TagSet{"cyber security", "fintech"});
  CHECK(p.records[1].sectors.empty());
  CHECK(p.rejections.empty());
}

TEST_CASE("duplicate org ids are rejected, not dropped") {
  auto p = orgs_from(kOrgs + "o1,Acme,US,security\no1,Acme again,US,privacy\n");
  CHECK(p.records.size() == 1);
  REQUIRE(p.rejections.size() == 1);
  CHECK(p.rejections[0].line == 3);
  CHECK(p.rejections[0].reason.find("duplicate") != std::string::npos);
}

TEST_CASE("sector assignment") {
  CHECK(assign_sectors({"blockchain", "cryptocurrency"}) == SectorSet{SectorId::Blockchain});
  CHECK(assign_sectors({}).empty());
  CHECK(assign_sectors({"machine learning", "artificial intelligence"}) ==
        SectorSet{SectorId::MachineLearning, SectorId::ArtificialIntelligence});
  CHECK(assign_sectors({"E-Signature"}) == SectorSet{SectorId::ESignature});
  CHECK(assign_sectors({"  Internet_of--Things "}) == SectorSet{SectorId::InternetOfThings});
  CHECK(normalize_tag("  Cloud\tSECURITY ") == "cloud security");
  for (SectorId s : all_sectors()) CHECK(sector_from_name(sector_name(s)) == s);
}

TEST_CASE("sector assignment is idempotent and order independent") {
  CounterRng rng(3, 3);
  std::vector<std::string> pool;
  for (SectorId s : all_sectors()) pool.emplace_back(sector_name(s));
  pool.insert(pool.end(), {"fintech", "software", "ai", "cryptocurrency", "saas"});
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> picked;
    for (int k = 0; k < 5; ++k) picked.push_back(pool[rng.below(pool.size())]);
    TagSet tags(picked.begin(), picked.end());
    const SectorSet once = assign_sectors(tags);
    TagSet names;
    for (SectorId s : once) names.insert(normalize_tag(sector_name(s)));
    CHECK(assign_sectors(names) == once);
    std::reverse(picked.begin(), picked.end());
    CHECK(assign_sectors(TagSet(picked.begin(), picked.end())) == once);
  }
}

TEST_CASE("funding rounds: provenance, date window and ordering") {
  auto p = rounds_from(kRounds +
                       "r1,o1,2015-01-01,5,,3,,seed\n"
                       "r2,o1,2014-01-01,2,10,1,5,series_a\n"
                       "r3,o1,1899-01-01,1,,0,,seed\n"
                       "r4,o1,2016-01-01,-1,,0,,seed\n");
  REQUIRE(p.records.size() == 2);
  CHECK(p.records[0].round_id == "r2");
  CHECK(p.records[1].round_id == "r1");
  CHECK(p.records[1].pmv_provenance == Provenance::missing);
  CHECK(p.records[0].pmv_provenance == Provenance::observed);
  REQUIRE(p.rejections.size() == 2);
  CHECK(p.rejections[0].line == 4);
  CHECK(p.rejections[1].reason == "negative amount");
  CHECK(p.input_rows == 4);
}

TEST_CASE("funding rounds against known organizations") {
  auto orgs = orgs_from(kOrgs + "o1,Acme,US,security\n");
  ParseContext ctx;
  ctx.organizations = &orgs.records;
  auto p = rounds_from(kRounds + "r1,o1,2015-01-01,5,,3,,seed\nr2,zz,2015-01-01,5,,3,,seed\n", ctx);
  CHECK(p.records.size() == 1);
  REQUIRE(p.rejections.size() == 1);
  CHECK(p.rejections[0].reason.find("unknown org_id") != std::string::npos);
}

TEST_CASE("exits: earliest wins, pending values, financing history") {
  auto rounds = rounds_from(kRounds + "r1,o1,2015-01-01,5,20,3,,seed\nr2,o2,2016-01-01,5,20,3,,seed\n");
  ParseContext ctx;
  ctx.rounds = &rounds.records;
  auto p = exits_from(kExits +
                          "o1,2019-01-01,IPO,500\n"
                          "o1,2018-01-01,acquisition,300\n"
                          "o2,2015-06-01,acquisition,100\n"
                          "o3,2017-01-01,acquisition,\n",
                      ctx);
  REQUIRE(p.records.size() == 2);
  CHECK(p.records[0].org_id == "o1");
  CHECK(p.records[0].kind == ExitKind::acquisition);
  CHECK(p.records[0].date.to_string() == "2018-01-01");
  CHECK(p.records[1].org_id == "o3");
  CHECK(p.records[1].pending_value());
  CHECK(p.records[1].value_provenance == Provenance::imputed);
  REQUIRE(p.rejections.size() == 2);
  CHECK(p.rejections[0].line == 2);
  CHECK(p.rejections[0].reason.find("earliest retained") != std::string::npos);
  CHECK(p.rejections[1].reason == "exit precedes financing history");
}

TEST_CASE("malformed input raises a parse error") {
  CHECK_THROWS_AS(orgs_from("id,name\n"), ParseError);
  CHECK_THROWS_AS(orgs_from(kOrgs + "o1,\"Acme,US,x\n"), ParseError);
  CHECK_THROWS_AS(rounds_from(""), ParseError);
}

TEST_CASE("serialize(parse(x)) reproduces accepted rows") {
  const std::string orgs_text = kOrgs + "o1,\"Acme, Inc.\",US,cyber security;fintech\no2,Beta,,privacy\n";
  auto orgs = orgs_from(orgs_text);
  std::ostringstream o;
  write_organizations(o, orgs.records);
  CHECK(o.str() == orgs_text);
  CHECK(orgs_from(o.str()).records == orgs.records);

  const std::string rounds_text = kRounds +
                                  "r1,o1,2014-01-01,2.5,10,1,5,series_a\n"
                                  "r2,o1,2015-01-01,5,,3,,seed\n";
  auto rounds = rounds_from(rounds_text);
  std::ostringstream r;
  write_funding_rounds(r, rounds.records, false);
  CHECK(r.str() == rounds_text);
  std::ostringstream rp;
  write_funding_rounds(rp, rounds.records, true);
  CHECK(rounds_from(rp.str()).records == rounds.records);

  const std::string exits_text = kExits + "o1,2018-01-01,ipo,300\no2,2019-01-01,acquisition,\n";
  auto exits = exits_from(exits_text);
  std::ostringstream e;
  write_exits(e, exits.records, false);
  CHECK(e.str() == exits_text);
  std::ostringstream ep;
  write_exits(ep, exits.records, true);
  CHECK(exits_from(ep.str()).records == exits.records);
}

TEST_CASE("accepted plus rejected equals input rows") {
  CounterRng rng(11, 0);
  const std::vector<std::string> cells = {"o1", "o2", "",  "2015-01-01", "1800-01-01", "x",   "-3",
                                          "4.5", "0",  "7", "seed",       "ipo",        "1e400"};
  auto cell = [&] { return cells[rng.below(cells.size())]; };
  for (int trial = 0; trial < 50; ++trial) {
    std::string org_text = kOrgs, round_text = kRounds, exit_text = kExits;
    const int n = 1 + static_cast<int>(rng.below(30));
    for (int i = 0; i < n; ++i) {
      const int width = 3 + static_cast<int>(rng.below(7));
      std::string o, r, e;
      for (int k = 0; k < width; ++k) {
        const std::string sep = k ? "," : "";
        o += sep + cell();
        r += sep + (k == 0 ? "r" + std::to_string(rng.below(10)) : cell());
        e += sep + cell();
      }
      org_text += o + "\n";
      round_text += r + "\n";
      exit_text += e + "\n";
    }
    auto po = orgs_from(org_text);
    CHECK(po.records.size() + po.rejections.size() == po.input_rows);
    CHECK(po.input_rows == static_cast<std::size_t>(n));
    auto pr = rounds_from(round_text);
    CHECK(pr.records.size() + pr.rejections.size() == pr.input_rows);
    auto pe = exits_from(exit_text);
    CHECK(pe.records.size() + pe.rejections.size() == pe.input_rows);
  }
}

TEST_CASE("dataset indices and window") {
  auto orgs = orgs_from(kOrgs + "o1,A,US,security\no2,B,US,privacy\n");
  auto rounds = rounds_from(kRounds + "b,o1,2015-01-01,5,20,3,,seed\na,o1,2015-01-01,5,20,3,,seed\n"
                                      "c,o1,2009-01-01,5,20,3,,seed\n");
  auto exits = exits_from(kExits + "o1,2018-01-01,ipo,300\n");
  Dataset d(orgs.records, rounds.records, exits.records);
  const auto& idx = d.rounds_of("o1");
  REQUIRE(idx.size() == 3);
  CHECK(d.rounds()[idx[0]].round_id == "c");
  CHECK(d.rounds()[idx[1]].round_id == "a");
  CHECK(d.rounds()[idx[2]].round_id == "b");
  CHECK(d.rounds_of("o2").empty());
  CHECK(d.find_exit("o1"));
  CHECK_FALSE(d.find_exit("o2"));
  const Dataset w = apply_window(d, DateWindow::parse("2010-01-01:2022-05-31"));
  CHECK(w.rounds().size() == 2);
  CHECK(w.organizations().size() == 2);
  CHECK(w.exits().size() == 1);
  CHECK_THROWS_AS(Dataset(orgs.records, {}, {exits.records[0], exits.records[0]}), DomainError);
}
