#include "vm/sim.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <json.hpp>
#include <sstream>

#include "vm/csv.hpp"
#include "vm/error.hpp"
#include "vm/random.hpp"

namespace vm {

namespace {

// Stream purposes. Each (purpose, entity, slot) is an independent Philox stream.
enum Purpose : std::uint8_t {
  kMarket = 1,
  kFirmPath = 2,
  kLifecycle = 3,
  kAttributes = 4,
  kPmvMissing = 5,
  kExitMissing = 6,
};

struct CountryWeight {
  const char* code;
  double weight;
};

constexpr CountryWeight kCountries[] = {
    {"US", 0.50}, {"IL", 0.10}, {"GB", 0.10}, {"CN", 0.08}, {"DE", 0.06},
    {"FR", 0.05}, {"IN", 0.04}, {"CA", 0.04}, {"SG", 0.03},
};

std::string pick_country(CounterRng& rng) {
  double u = rng.uniform();
  for (const auto& c : kCountries) {
    if (u < c.weight) return c.code;
    u -= c.weight;
  }
  return kCountries[0].code;
}

std::string padded(int v, int width) {
  std::string s = std::to_string(v);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

RoundType type_for(int k) {
  switch (k) {
    case 0: return RoundType::seed;
    case 1: return RoundType::series_a;
    case 2: return RoundType::series_b;
    default: return RoundType::series_c_plus;
  }
}

}  // namespace

void SimSpec::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
  };
  if (!(sigma_m >= 0) || !(sigma >= 0)) throw ConfigError("volatilities must be non-negative");
  if (n_firms < 0) throw ConfigError("n_firms must be non-negative");
  if (quarters < 1) throw ConfigError("quarters must be at least 1");
  if (rounds.per_firm < 1) throw ConfigError("rounds.per_firm must be at least 1");
  if (!(rounds.spacing_mean_quarters >= 1)) throw ConfigError("rounds.spacing_mean_quarters must be >= 1");
  if (!(exits.delay_mean_quarters >= 1)) throw ConfigError("exits.delay_mean_quarters must be >= 1");
  if (!(rounds.raise_fraction > 0)) throw ConfigError("rounds.raise_fraction must be positive");
  if (!(initial_value_musd > 0) || !(index_base > 0)) throw ConfigError("initial values must be positive");
  prob(rounds.pmv_missing_rate, "rounds.pmv_missing_rate");
  prob(exits.exit_probability, "exits.exit_probability");
  prob(exits.ipo_probability, "exits.ipo_probability");
  prob(exits.value_missing_rate, "exits.value_missing_rate");
}

std::string SimSpec::to_toml() const {
  std::ostringstream out;
  auto num = [](double v) { return csv::format_double(v); };
  out << "[market]\n"
      << "mu_m = " << num(mu_m) << "\n"
      << "sigma_m = " << num(sigma_m) << "\n"
      << "rf = " << num(rf) << "\n"
      << "index_base = " << num(index_base) << "\n\n"
      << "[firm]\n"
      << "gamma = " << num(gamma) << "\n"
      << "delta = " << num(delta) << "\n"
      << "sigma = " << num(sigma) << "\n"
      << "initial_value_musd = " << num(initial_value_musd) << "\n"
      << "initial_value_log_sd = " << num(initial_value_log_sd) << "\n\n"
      << "[panel]\n"
      << "n_firms = " << n_firms << "\n"
      << "quarters = " << quarters << "\n"
      << "start = \"" << start.to_string() << "\"\n"
      << "seed = " << seed << "\n\n"
      << "[rounds]\n"
      << "per_firm = " << rounds.per_firm << "\n"
      << "spacing_mean_quarters = " << num(rounds.spacing_mean_quarters) << "\n"
      << "raise_fraction = " << num(rounds.raise_fraction) << "\n"
      << "pmv_missing_rate = " << num(rounds.pmv_missing_rate) << "\n"
      << "blank_first_rounds = " << (rounds.blank_first_rounds ? "true" : "false") << "\n\n"
      << "[exits]\n"
      << "delay_mean_quarters = " << num(exits.delay_mean_quarters) << "\n"
      << "exit_probability = " << num(exits.exit_probability) << "\n"
      << "ipo_probability = " << num(exits.ipo_probability) << "\n"
      << "value_missing_rate = " << num(exits.value_missing_rate) << "\n";
  return out.str();
}

SimSpec SimSpec::from_config(const KeyValues& kv) {
  SimSpec s;
  auto d = [&](const char* key, double& field) {
    if (auto v = kv.get_double(key)) field = *v;
  };
  auto i = [&](const char* key, int& field) {
    if (auto v = kv.get_int(key)) field = static_cast<int>(*v);
  };
  d("market.mu_m", s.mu_m);
  d("market.sigma_m", s.sigma_m);
  d("market.rf", s.rf);
  d("market.index_base", s.index_base);
  d("firm.gamma", s.gamma);
  d("firm.delta", s.delta);
  d("firm.sigma", s.sigma);
  d("firm.initial_value_musd", s.initial_value_musd);
  d("firm.initial_value_log_sd", s.initial_value_log_sd);
  i("panel.n_firms", s.n_firms);
  i("panel.quarters", s.quarters);
  if (auto v = kv.get("panel.start")) {
    auto q = Quarter::parse(*v);
    if (!q) throw ConfigError("panel.start must look like 2010Q1, got '" + *v + "'");
    s.start = *q;
  }
  if (auto v = kv.get_int("panel.seed")) s.seed = static_cast<std::uint64_t>(*v);
  i("rounds.per_firm", s.rounds.per_firm);
  d("rounds.spacing_mean_quarters", s.rounds.spacing_mean_quarters);
  d("rounds.raise_fraction", s.rounds.raise_fraction);
  d("rounds.pmv_missing_rate", s.rounds.pmv_missing_rate);
  if (auto v = kv.get_bool("rounds.blank_first_rounds")) s.rounds.blank_first_rounds = *v;
  d("exits.delay_mean_quarters", s.exits.delay_mean_quarters);
  d("exits.exit_probability", s.exits.exit_probability);
  d("exits.ipo_probability", s.exits.ipo_probability);
  d("exits.value_missing_rate", s.exits.value_missing_rate);
  s.validate();
  return s;
}

std::vector<double> simulate_market(const SimSpec& spec) {
  std::vector<double> inc(static_cast<std::size_t>(spec.quarters));
  for (int q = 0; q < spec.quarters; ++q) {
    CounterRng rng(spec.seed, stream_id(kMarket, 0, static_cast<std::uint32_t>(q)));
    inc[static_cast<std::size_t>(q)] = spec.mu_m + spec.sigma_m * rng.normal();
  }
  return inc;
}

std::vector<std::vector<double>> simulate_firm_paths(const SimSpec& spec, const std::vector<double>& market) {
  std::vector<std::vector<double>> paths(static_cast<std::size_t>(spec.n_firms));
  for (int f = 0; f < spec.n_firms; ++f) {
    auto& path = paths[static_cast<std::size_t>(f)];
    path.resize(market.size());
    for (std::size_t q = 0; q < market.size(); ++q) {
      CounterRng rng(spec.seed, stream_id(kFirmPath, static_cast<std::uint32_t>(f), static_cast<std::uint32_t>(q)));
      path[q] = spec.rf + spec.gamma + spec.delta * (market[q] - spec.rf) + spec.sigma * rng.normal();
    }
  }
  return paths;
}

SyntheticDataset emit_dataset(const SimSpec& spec, const std::vector<double>& market,
                              const std::vector<std::vector<double>>& paths) {
  SyntheticDataset out;
  out.spec = spec;
  const QuarterGrid grid = spec.grid();
  const int last_q = spec.quarters - 1;

  double f = spec.rounds.raise_fraction;
  if (f >= 1.0) {
    out.warnings.push_back("raise fraction " + csv::format_double(f) + " would exceed post-money; clamped to 0.99");
    f = 0.99;
  }

  // market index at quarter ends, plus the base level before the first quarter
  double level = spec.index_base;
  out.index.observations.emplace_back(grid.first().prev().last_day(), level);
  for (int q = 0; q < spec.quarters; ++q) {
    level *= std::exp(market[static_cast<std::size_t>(q)]);
    out.index.observations.emplace_back(grid.at(static_cast<std::size_t>(q)).last_day(), level);
  }
  const double rate_pct = 100.0 * std::expm1(4.0 * spec.rf);
  for (int q = 0; q < spec.quarters; ++q) {
    out.tbill.observations.emplace_back(grid.at(static_cast<std::size_t>(q)).first_day(), rate_pct);
  }

  const auto& sectors = all_sectors();
  int round_counter = 0;
  for (int fi = 0; fi < spec.n_firms; ++fi) {
    const auto firm = static_cast<std::uint32_t>(fi);
    const auto& path = paths[static_cast<std::size_t>(fi)];

    CounterRng attr(spec.seed, stream_id(kAttributes, firm, 0));
    Organization org;
    org.org_id = "F" + padded(fi + 1, 5);
    org.name = "Synthetic Firm " + std::to_string(fi + 1);
    org.country = pick_country(attr);
    org.tags.insert(normalize_tag(sector_name(sectors[attr.below(sectors.size())])));
    if (attr.bernoulli(0.3)) org.tags.insert(normalize_tag(sector_name(sectors[attr.below(sectors.size())])));
    if (attr.bernoulli(0.5)) org.tags.insert("software");
    org.sectors = assign_sectors(org.tags);

    CounterRng life(spec.seed, stream_id(kLifecycle, firm, 0));
    const int first_span = std::max(1, spec.quarters * 3 / 4);
    std::vector<int> round_q;
    int q = static_cast<int>(life.below(static_cast<std::uint64_t>(first_span)));
    for (int k = 0; k < spec.rounds.per_firm; ++k) {
      if (k > 0) q = std::min(q + life.geometric(1.0 / spec.rounds.spacing_mean_quarters), last_q);
      round_q.push_back(q);
    }
    std::optional<int> exit_q;
    bool ipo = false;
    if (life.bernoulli(spec.exits.exit_probability)) {
      const int eq = round_q.back() + life.geometric(1.0 / spec.exits.delay_mean_quarters);
      ipo = life.bernoulli(spec.exits.ipo_probability);
      if (eq <= last_q) exit_q = eq;
    }

    // cumulative log price at each quarter end, anchored so the first post-money is V0
    std::vector<double> cum(path.size());
    double acc = 0.0;
    for (std::size_t t = 0; t < path.size(); ++t) cum[t] = (acc += path[t]);
    const double ln_v0 = std::log(spec.initial_value_musd) + spec.initial_value_log_sd * attr.normal();
    double shares = 1.0;
    const double first_shares = shares / (1.0 - f);
    const double ln_p_offset = ln_v0 - std::log(first_shares) - cum[static_cast<std::size_t>(round_q.front())];
    auto price = [&](int t) { return std::exp(ln_p_offset + cum[static_cast<std::size_t>(t)]); };

    for (int k = 0; k < static_cast<int>(round_q.size()); ++k) {
      CounterRng rattr(spec.seed, stream_id(kAttributes, firm, static_cast<std::uint32_t>(k + 1)));
      shares /= (1.0 - f);
      const double post = price(round_q[static_cast<std::size_t>(k)]) * shares;
      FundingRound r;
      r.round_id = "R" + padded(++round_counter, 7);
      r.org_id = org.org_id;
      r.date = grid.at(static_cast<std::size_t>(round_q[static_cast<std::size_t>(k)])).last_day();
      r.amount_musd = f * post;
      r.pmv_musd = post;
      r.pmv_provenance = Provenance::observed;
      r.investor_count = 1 + static_cast<int>(rattr.below(8));
      if (rattr.bernoulli(0.7)) r.lead_investor_rank = 1 + static_cast<int>(rattr.below(200));
      r.round_type = type_for(k);
      CounterRng miss(spec.seed, stream_id(kPmvMissing, firm, static_cast<std::uint32_t>(k)));
      const bool eligible = k > 0 || spec.rounds.blank_first_rounds;
      if (eligible && miss.bernoulli(spec.rounds.pmv_missing_rate)) {
        r.pmv_musd.reset();
        r.pmv_provenance = Provenance::missing;
      }
      out.rounds.push_back(std::move(r));
    }
    if (exit_q) {
      ExitEvent e;
      e.org_id = org.org_id;
      e.date = grid.at(static_cast<std::size_t>(*exit_q)).last_day();
      e.kind = ipo ? ExitKind::ipo : ExitKind::acquisition;
      e.exit_value_musd = price(*exit_q) * shares;
      e.value_provenance = Provenance::observed;
      CounterRng miss(spec.seed, stream_id(kExitMissing, firm, 0));
      if (!ipo && miss.bernoulli(spec.exits.value_missing_rate)) {  // listed exits always carry a price
        e.exit_value_musd.reset();
        e.value_provenance = Provenance::imputed;
      }
      out.exits.push_back(std::move(e));
    }
    out.organizations.push_back(std::move(org));
  }
  return out;
}

SyntheticDataset simulate(const SimSpec& spec) {
  spec.validate();
  auto market = simulate_market(spec);
  auto paths = simulate_firm_paths(spec, market);
  return emit_dataset(spec, market, paths);
}

std::string SyntheticDataset::ground_truth_json() const {
  nlohmann::ordered_json j;
  j["gamma"] = spec.gamma;
  j["delta"] = spec.delta;
  j["sigma"] = spec.sigma;
  j["mu_m"] = spec.mu_m;
  j["sigma_m"] = spec.sigma_m;
  j["rf"] = spec.rf;
  j["n_firms"] = spec.n_firms;
  j["quarters"] = spec.quarters;
  j["start"] = spec.start.to_string();
  j["seed"] = spec.seed;
  j["raise_fraction"] = spec.rounds.raise_fraction;
  j["rounds"] = rounds.size();
  j["exits"] = exits.size();
  j["warnings"] = warnings;
  return j.dump(2) + "\n";
}

QuarterlySectorSeries cross_section_series(const SimSpec& spec, const std::vector<std::vector<double>>& paths,
                                           const std::string& label) {
  QuarterlySectorSeries s;
  s.sector = label;
  const QuarterGrid grid = spec.grid();
  for (std::size_t q = 0; q < grid.size(); ++q) {
    double sum = 0.0;
    for (const auto& p : paths) sum += p[q];
    const double mean_log = sum / static_cast<double>(paths.size());
    s.points.push_back({grid.at(q), std::expm1(mean_log), paths.size()});
  }
  return s;
}

MarketSeries simulated_market_series(const SimSpec& spec, const std::vector<double>& market) {
  return MarketSeries{spec.grid(), market, std::vector<double>(market.size(), spec.rf)};
}

}  // namespace vm
