#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "vm/config_file.hpp"
#include "vm/error.hpp"
#include "vm/pipeline.hpp"
#include "vm/sim.hpp"

using namespace vm;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("vm_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("key-value files") {
  const auto kv = KeyValues::parse(
      "# comment\n[sample]\nwindow = \"2011-01-01:2012-12-31\"  # trailing\n[fit]\nmin_quarters = 5\n"
      "flag = true\nrate = 0.25 # note\n");
  CHECK(kv.get("sample.window") == "2011-01-01:2012-12-31");
  CHECK(kv.get_int("fit.min_quarters") == 5);
  CHECK(kv.get_bool("fit.flag") == true);
  CHECK(kv.get_double("fit.rate") == 0.25);
  CHECK_FALSE(kv.get("fit.missing"));
  CHECK_THROWS_AS(kv.get_int("sample.window"), ConfigError);
  CHECK_THROWS_AS(kv.get_bool("fit.rate"), ConfigError);
  CHECK_THROWS_AS(KeyValues::load("/nonexistent/vm.toml"), InputError);
}

TEST_CASE("run configuration round trip and validation") {
  RunConfig c;
  c.dilution = DilutionMode::as_printed;
  c.imputer = std::nullopt;
  c.min_quarters = 7;
  c.window = DateWindow::parse("2012-01-01:2019-06-30");
  c.order = ConversionOrder::annual_first;
  c.riskfree = RateConversion::simple;
  c.report.geo_top = 3;
  const auto back = RunConfig::from_key_values(KeyValues::parse(c.to_toml()));
  CHECK(back.to_toml() == c.to_toml());
  CHECK_FALSE(back.imputer);
  CHECK(back.min_quarters == 7);
  CHECK(c.to_toml().find("out") == std::string::npos);

  auto kv = RunConfig{}.to_key_values();
  kv.set("fit.bogus", "1");
  CHECK_THROWS_AS(RunConfig::from_key_values(kv), ConfigError);
  kv = RunConfig{}.to_key_values();
  kv.set("returns.dilution", "creative");
  CHECK_THROWS_AS(RunConfig::from_key_values(kv), ConfigError);
  kv = RunConfig{}.to_key_values();
  kv.set("fit.min_quarters", "2");
  CHECK_THROWS_AS(RunConfig::from_key_values(kv), ConfigError);
}

TEST_CASE("configuration precedence") {
  const auto dir = scratch_dir("precedence");
  write_text(dir / "run.toml",
             "[inputs]\norganizations = \"data/orgs.csv\"\n[impute]\nseed = 5\n[fit]\nmin_quarters = 4\n"
             "[returns]\ndilution = \"as-printed\"\n");
  const std::string path = (dir / "run.toml").string();

  auto c = resolve_config(path, {}, KeyValues{});
  CHECK(c.seed == 5);
  CHECK(c.min_quarters == 4);
  CHECK(c.dilution == DilutionMode::as_printed);
  CHECK(fs::path(c.organizations) == (dir / "data/orgs.csv").lexically_normal());
  CHECK(c.exits == "exits.csv");  // defaults untouched

  c = resolve_config(path, {{"VM_IMPUTE_SEED", "6"}, {"VM_FIT_MIN_QUARTERS", "9"}, {"VM_NOT_A_KEY", "1"}}, KeyValues{});
  CHECK(c.seed == 6);
  CHECK(c.min_quarters == 9);

  KeyValues flags;
  flags.set("impute.seed", "7");
  c = resolve_config(path, {{"VM_IMPUTE_SEED", "6"}}, flags);
  CHECK(c.seed == 7);
  CHECK(c.min_quarters == 4);

  c = resolve_config(std::nullopt, {}, KeyValues{});
  CHECK(c.to_toml() == RunConfig{}.to_toml());
}

TEST_CASE("hashing and file reading") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  try {
    read_file("/nonexistent/rounds.csv");
    FAIL("expected an input error");
  } catch (const InputError& e) {
    CHECK(e.path() == "/nonexistent/rounds.csv");
  }
}

TEST_CASE("artifact manifest") {
  const auto dir = scratch_dir("manifest");
  ArtifactSink sink(dir);
  sink.note_input("in.csv", "a,b\n");
  sink.write("sub/x.csv", "x\n1\n");
  sink.write_manifest("ingest", "[fit]\nmin_quarters = 3\n");
  std::ifstream in(dir / "manifest.json");
  const auto j = nlohmann::json::parse(in);
  CHECK(j["command"] == "ingest");
  CHECK(j["version"] == kToolVersion);
  CHECK(j["config_sha256"] == sha256_hex("[fit]\nmin_quarters = 3\n"));
  CHECK(j["inputs"][0]["sha256"] == sha256_hex("a,b\n"));
  CHECK(j["inputs"][0]["bytes"] == 4);
  CHECK(j["artifacts"][0]["path"] == "sub/x.csv");
  CHECK(j["artifacts"][0]["sha256"] == sha256_hex("x\n1\n"));
  CHECK(fs::exists(dir / "sub/x.csv"));
}

TEST_CASE("full run on a small simulated dataset") {
  const auto dir = scratch_dir("pipeline");
  SimSpec s;
  s.n_firms = 150;
  s.quarters = 40;
  s.seed = 17;
  s.rounds.pmv_missing_rate = 0.3;
  s.exits.value_missing_rate = 0.3;
  const auto d = simulate(s);
  auto dump = [&](const char* name, auto&& fn) {
    std::ofstream out(dir / name, std::ios::binary);
    fn(out);
  };
  dump("organizations.csv", [&](std::ostream& o) { write_organizations(o, d.organizations); });
  dump("funding_rounds.csv", [&](std::ostream& o) { write_funding_rounds(o, d.rounds, false); });
  dump("exits.csv", [&](std::ostream& o) { write_exits(o, d.exits, false); });
  dump("index.csv", [&](std::ostream& o) { write_price_series(o, d.index); });
  dump("tbill.csv", [&](std::ostream& o) { write_rate_series(o, d.tbill); });

  RunConfig c;
  c.organizations = (dir / "organizations.csv").string();
  c.funding_rounds = (dir / "funding_rounds.csv").string();
  c.exits = (dir / "exits.csv").string();
  c.index = (dir / "index.csv").string();
  c.tbill = (dir / "tbill.csv").string();
  c.window = DateWindow::parse("2010-01-01:2019-12-31");
  c.out = (dir / "out").string();
  run(Command::all, c);
  for (const char* f : {"ingest/summary.json", "impute/imputer.model", "impute/funding_rounds.csv",
                        "returns/round_returns.csv", "fit/fits.csv", "fit/implied.csv", "report/table2.csv",
                        "report/report.md", "run_config.toml", "manifest.json"}) {
    CHECK_MESSAGE(fs::exists(dir / "out" / f), f);
  }

  // stage by stage: observed values survive imputation unchanged
  const auto ingest = run_ingest(c, nullptr);
  const auto impute = run_impute(ingest, c);
  REQUIRE(impute.fit);
  const auto& before = ingest.data.rounds();
  const auto& after = impute.outcome.data.rounds();
  REQUIRE(before.size() == after.size());
  std::size_t missing = 0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    if (before[i].pmv_musd) {
      CHECK(after[i] == before[i]);
    } else {
      ++missing;
      CHECK(after[i].pmv_provenance == Provenance::imputed);
    }
  }
  CHECK(impute.outcome.rounds_imputed == missing);

  c.imputer = std::nullopt;
  const auto pass = run_impute(ingest, c);
  CHECK_FALSE(pass.fit);
  CHECK(pass.outcome.rounds_imputed == 0);
}
