#include <doctest.h>

#include <cmath>
#include <map>
#include <json.hpp>
#include <sstream>

#include "vm/econometrics.hpp"
#include "vm/error.hpp"
#include "vm/ingest.hpp"
#include "vm/returns.hpp"
#include "vm/sim.hpp"

using namespace vm;

namespace {

SimSpec small_spec(std::uint64_t seed = 7) {
  SimSpec s;
  s.n_firms = 100;
  s.quarters = 40;
  s.seed = seed;
  return s;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("market increments") {
  SimSpec s = small_spec();
  s.sigma_m = 0.0;
  for (double x : simulate_market(s)) CHECK(x == s.mu_m);

  s = small_spec();
  s.quarters = 10000;
  const auto m = simulate_market(s);
  CHECK(std::abs(mean_of(m) - s.mu_m) < 3.0 * s.sigma_m / 100.0);
  double var = 0.0;
  for (double x : m) var += (x - mean_of(m)) * (x - mean_of(m));
  CHECK(std::sqrt(var / 9999.0) == doctest::Approx(s.sigma_m).epsilon(0.05));
}

TEST_CASE("firm increments follow the log market model") {
  SimSpec s = small_spec();
  s.sigma = 0.0;
  s.delta = 0.0;
  const auto market = simulate_market(s);
  for (const auto& path : simulate_firm_paths(s, market)) {
    for (double x : path) CHECK(x == doctest::Approx(s.rf + s.gamma));
  }
  s.delta = 1.0;
  s.gamma = 0.0;
  for (const auto& path : simulate_firm_paths(s, market)) {
    for (std::size_t q = 0; q < path.size(); ++q) CHECK(path[q] == doctest::Approx(market[q]));
  }
}

TEST_CASE("regression on the cross-section recovers the parameters") {
  SimSpec s = small_spec(11);
  s.quarters = 200;
  s.n_firms = 50;
  int gamma_hits = 0, delta_hits = 0;
  const int seeds = 100;
  for (int seed = 1; seed <= seeds; ++seed) {
    s.seed = static_cast<std::uint64_t>(seed);
    const auto market = simulate_market(s);
    const auto paths = simulate_firm_paths(s, market);
    const auto fit = fit_log_model(cross_section_series(s, paths), simulated_market_series(s, market));
    CHECK(fit.n_obs == 200);
    gamma_hits += std::abs(fit.gamma - s.gamma) < 2.0 * fit.se_gamma;
    delta_hits += std::abs(fit.delta - s.delta) < 2.0 * fit.se_delta;
    CHECK(std::abs(fit.gamma - s.gamma) < 4.0 * fit.se_gamma);
    CHECK(std::abs(fit.delta - s.delta) < 4.0 * fit.se_delta);
    CHECK(fit.sigma == doctest::Approx(s.sigma / std::sqrt(50.0)).epsilon(0.2));
  }
  // nominal two-standard-error coverage is about 95%
  CHECK(gamma_hits >= 88);
  CHECK(delta_hits >= 88);
}

TEST_CASE("simulation is deterministic in the seed") {
  const auto a = simulate(small_spec(3)), b = simulate(small_spec(3)), c = simulate(small_spec(4));
  CHECK(a.rounds == b.rounds);
  CHECK(a.exits == b.exits);
  CHECK(a.organizations == b.organizations);
  CHECK(a.ground_truth_json() == b.ground_truth_json());
  CHECK_FALSE(a.rounds == c.rounds);
}

TEST_CASE("round and exit counts") {
  SimSpec s = small_spec();
  s.rounds.per_firm = 2;
  const auto d = simulate(s);
  CHECK(d.organizations.size() == 100);
  CHECK(d.rounds.size() == 200);
  CHECK(d.exits.size() <= 100);
  for (const auto& r : d.rounds) {
    CHECK(r.pmv_provenance == Provenance::observed);
    CHECK(r.pmv_musd);
    CHECK(r.amount_musd == doctest::Approx(0.2 * *r.pmv_musd));
  }
  std::size_t ipos = 0;
  for (const auto& e : d.exits) {
    CHECK(e.exit_value_musd);
    ipos += e.kind == ExitKind::ipo;
  }
  CHECK(ipos > 0);
  CHECK(ipos < d.exits.size());
  CHECK(d.index.observations.size() == 41);
  CHECK(d.tbill.observations.size() == 40);
}

TEST_CASE("missingness controls") {
  SimSpec s = small_spec();
  s.rounds.pmv_missing_rate = 1.0;
  s.exits.value_missing_rate = 1.0;
  auto d = simulate(s);
  std::map<std::string, int> seen;
  std::size_t blank = 0;
  for (const auto& r : d.rounds) {
    const bool first = seen[r.org_id]++ == 0;
    CHECK(r.pmv_musd.has_value() == first);
    blank += !r.pmv_musd;
  }
  CHECK(blank == d.rounds.size() - 100);
  for (const auto& e : d.exits) {
    if (e.kind == ExitKind::acquisition) CHECK(e.pending_value());
    if (e.kind == ExitKind::ipo) CHECK_FALSE(e.pending_value());
  }

  s.rounds.blank_first_rounds = true;
  d = simulate(s);
  for (const auto& r : d.rounds) CHECK_FALSE(r.pmv_musd);
}

TEST_CASE("emitted files load through ingest without rejections") {
  SimSpec s = small_spec();
  s.rounds.pmv_missing_rate = 0.2;
  s.exits.value_missing_rate = 0.3;
  const auto d = simulate(s);
  std::stringstream orgs, rounds, exits;
  write_organizations(orgs, d.organizations);
  write_funding_rounds(rounds, d.rounds, false);
  write_exits(exits, d.exits, false);
  const auto po = parse_organizations(orgs);
  ParseContext ctx;
  ctx.organizations = &po.records;
  const auto pr = parse_funding_rounds(rounds, ctx);
  ctx.rounds = &pr.records;
  const auto pe = parse_exits(exits, ctx);
  CHECK(po.rejections.empty());
  CHECK(pr.rejections.empty());
  CHECK(pe.rejections.empty());
  CHECK(po.records.size() == d.organizations.size());
  CHECK(pr.records.size() == d.rounds.size());
  CHECK(pe.records.size() == d.exits.size());
  for (const auto& o : po.records) CHECK_FALSE(o.sectors.empty());
}

TEST_CASE("share issuance makes round returns equal per-share returns") {
  SimSpec s = small_spec(5);
  const auto market = simulate_market(s);
  const auto paths = simulate_firm_paths(s, market);
  const auto d = emit_dataset(s, market, paths);
  const Dataset data = d.dataset();
  const auto result = compute_round_returns(data);
  REQUIRE(result.returns.size() > 50);
  const QuarterGrid grid = s.grid();
  std::map<std::string, std::size_t> firm_of;
  for (std::size_t i = 0; i < d.organizations.size(); ++i) firm_of[d.organizations[i].org_id] = i;
  std::map<std::string, Date> round_date;
  for (const auto& r : d.rounds) round_date[r.round_id] = r.date;
  for (const auto& rr : result.returns) {
    const auto& path = paths[firm_of.at(rr.org_id)];
    const std::size_t from = grid.position(Quarter::of(round_date.at(rr.round_id)));
    const std::size_t to = grid.position(Quarter::of(rr.exit_date));
    double log_gain = 0.0;
    for (std::size_t q = from + 1; q <= to; ++q) log_gain += path[q];
    CHECK(std::log1p(rr.R) == doctest::Approx(log_gain).epsilon(1e-9));
  }
}

TEST_CASE("spec validation and round trip") {
  SimSpec s = small_spec();
  s.rounds.pmv_missing_rate = 1.5;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = small_spec();
  s.sigma = -1.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);

  s = small_spec(99);
  s.delta = 0.9;
  s.rounds.raise_fraction = 0.3;
  s.exits.ipo_probability = 0.6;
  const auto back = SimSpec::from_config(KeyValues::parse(s.to_toml(), "spec"));
  CHECK(back.to_toml() == s.to_toml());
  CHECK(back.delta == 0.9);
  CHECK(back.seed == 99);

  const auto truth = nlohmann::json::parse(simulate(small_spec()).ground_truth_json());
  CHECK(truth.contains("gamma"));
}
