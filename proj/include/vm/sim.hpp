#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vm/config_file.hpp"
#include "vm/date.hpp"
#include "vm/ingest.hpp"
#include "vm/marketdata.hpp"
#include "vm/returns.hpp"

namespace vm {

struct RoundPolicy {
  int per_firm = 3;
  double spacing_mean_quarters = 4.0;  // geometric gaps, support >= 1
  double raise_fraction = 0.2;         // m = fraction x post-money
  double pmv_missing_rate = 0.0;
  bool blank_first_rounds = false;  // missingness also applies to each firm's first round
};

struct ExitPolicy {
  double delay_mean_quarters = 4.0;  // geometric gap after the last round
  double exit_probability = 1.0;
  double ipo_probability = 0.3;
  double value_missing_rate = 0.0;  // acquisitions only
};

// All rates and volatilities are per quarter.
struct SimSpec {
  double mu_m = 0.02;
  double sigma_m = 0.08;
  double gamma = 0.07;
  double delta = 0.48;
  double sigma = 0.1418;
  double rf = 0.005;  // constant quarterly log risk-free return
  int n_firms = 500;
  int quarters = 48;
  Quarter start{2010, 1};
  double initial_value_musd = 10.0;  // median first post-money valuation
  double initial_value_log_sd = 1.0;
  double index_base = 1000.0;
  RoundPolicy rounds;
  ExitPolicy exits;
  std::uint64_t seed = 1;

  QuarterGrid grid() const { return QuarterGrid(start, Quarter::from_index(start.index() + quarters - 1)); }
  void validate() const;
  std::string to_toml() const;
  static SimSpec from_config(const KeyValues& kv);
};

// Quarterly market log increments mu_m + sigma_m z_q.
std::vector<double> simulate_market(const SimSpec& spec);

// Per-firm quarterly log increments of the per-share value:
//   rf + gamma + delta (dlnV^m - rf) + sigma e_q,  e independent of the market shock.
std::vector<std::vector<double>> simulate_firm_paths(const SimSpec& spec, const std::vector<double>& market);

struct SyntheticDataset {
  std::vector<Organization> organizations;
  std::vector<FundingRound> rounds;
  std::vector<ExitEvent> exits;
  PriceSeries index;
  RateSeries tbill;
  std::vector<std::string> warnings;
  SimSpec spec;

  Dataset dataset() const { return Dataset(organizations, rounds, exits); }
  std::string ground_truth_json() const;
};

// Firm value = per-share price x shares outstanding. Each round issues new shares at
// the current price so that m / post-money equals the raise fraction; the exit value is
// the price at exit times the final share count.
SyntheticDataset emit_dataset(const SimSpec& spec, const std::vector<double>& market,
                              const std::vector<std::vector<double>>& paths);

SyntheticDataset simulate(const SimSpec& spec);

// Cross-sectional geometric-mean return of all firms per quarter, expressed as a
// sector series (mean_rq = exp(mean log increment) - 1).
QuarterlySectorSeries cross_section_series(const SimSpec& spec, const std::vector<std::vector<double>>& paths,
                                           const std::string& label = "Simulated");

// Market series implied by the simulated increments and the constant risk-free rate.
MarketSeries simulated_market_series(const SimSpec& spec, const std::vector<double>& market);

}  // namespace vm
