#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vm/date.hpp"
#include "vm/marketdata.hpp"
#include "vm/returns.hpp"

namespace vm {

// Simple regression y = a + b x + e with classical (homoskedastic) standard errors.
struct OlsResult {
  double intercept = 0.0;
  double slope = 0.0;
  double se_intercept = 0.0;
  double se_slope = 0.0;
  double cov_intercept_slope = 0.0;
  double sigma = 0.0;  // sqrt(SSR / (n - 2))
  double ssr = 0.0;
  std::size_t n = 0;
  std::vector<double> residuals;
};

// Needs n >= 3 and a non-constant regressor.
OlsResult ols(std::span<const double> x, std::span<const double> y);

// Per-quarter parameters of the excess log-return regression
//   ln(1 + r_q) - ln R^f = gamma + delta (ln R^m - ln R^f) + e,   e ~ N(0, sigma^2).
struct LogModelFit {
  std::string sector;
  double gamma = 0.0;
  double delta = 0.0;
  double sigma = 0.0;
  double se_gamma = 0.0;
  double se_delta = 0.0;
  double cov_gamma_delta = 0.0;
  double p_gamma = 1.0;  // two-sided, t with n-2 df
  double p_delta = 1.0;
  std::size_t n_obs = 0;
  std::vector<Quarter> quarters;  // estimation sample
  std::size_t dropped_total_loss = 0;  // quarters whose mean return was -100%
};

// Quarters where the sector series and both market series exist. Market moments for
// the implied quantities are computed over exactly these quarters.
LogModelFit fit_log_model(const QuarterlySectorSeries& series, const MarketSeries& market,
                          std::size_t min_quarters = 3);

MarketMoments moments_over(const LogModelFit& fit, const MarketSeries& market);

double expected_log_return(const LogModelFit& fit, const MarketMoments& mm);
double log_return_variance(const LogModelFit& fit, const MarketMoments& mm);

struct ArithmeticMoments {
  double mean = 0.0;      // E[R] - 1 convention: net expected return
  double variance = 0.0;
};

// Lognormal conversion with mu = E[ln(1+r)], var = V[ln(1+r)].
ArithmeticMoments arithmetic_moments(double mu, double var);

struct AlphaBeta {
  double beta = 0.0;
  double alpha_net = 0.0;    // per quarter, E[R] - rf - beta (E[R_m] - rf)
  double alpha_gross = 1.0;  // 1 + alpha_net
};

// Arithmetic beta from the jointly lognormal covariance identity; alpha in excess form.
// `market` holds the market's arithmetic moments from the same log moments.
AlphaBeta implied_alpha_beta(const LogModelFit& fit, const MarketMoments& mm, const ArithmeticMoments& market);
AlphaBeta implied_alpha_beta(const LogModelFit& fit, const MarketMoments& mm);

enum class AnnualizeKind { log_mean, variance, rate };
// Linear convention: x 4 quarters x 100 percent.
double annualize(double per_quarter, AnnualizeKind kind);

enum class ConversionOrder {
  quarterly_first,  // apply the lognormal formulas per quarter, then annualize linearly
  annual_first,     // scale log moments to a year first, then apply the formulas
};

struct ImpliedPerformance {
  // per quarter
  double e_ln_r = 0.0;
  double v_ln_r = 0.0;
  double e_R = 0.0;
  double v_R = 0.0;
  double rf = 0.0;   // arithmetic risk-free, exp(mu_ln_rf) - 1
  double e_Rm = 0.0;
  double beta = 0.0;
  double alpha_net = 0.0;
  double alpha_gross = 1.0;
  // delta-method standard errors, moments treated as known
  double se_e_ln_r = 0.0;
  double se_e_R = 0.0;
  // annualized percent views
  double e_ln_r_ann_pct = 0.0;
  double se_e_ln_r_ann_pct = 0.0;
  double v_ln_r_ann_pct = 0.0;
  double e_R_ann_pct = 0.0;
  double se_e_R_ann_pct = 0.0;
  double v_R_ann_pct = 0.0;
};

ImpliedPerformance implied_performance(const LogModelFit& fit, const MarketMoments& mm,
                                       ConversionOrder order = ConversionOrder::quarterly_first);

// "***" / "**" / "*" at the 1 / 5 / 10 percent levels.
std::string significance_stars(double p);

struct SectorEstimate {
  LogModelFit fit;
  MarketMoments moments;
  ImpliedPerformance implied;
};

struct EstimationConfig {
  std::size_t min_quarters = 3;
  ConversionOrder order = ConversionOrder::quarterly_first;
};

struct EstimationReport {
  std::vector<SectorEstimate> estimates;
  std::vector<std::pair<std::string, std::string>> skipped;  // sector, reason
};

EstimationReport estimate_sectors(const std::vector<QuarterlySectorSeries>& series, const MarketSeries& market,
                                  const EstimationConfig& config = {});

void write_fits_csv(std::ostream& out, const std::vector<SectorEstimate>& estimates);
void write_implied_csv(std::ostream& out, const std::vector<SectorEstimate>& estimates);
// Table-style rendering with significance stars.
void write_fits_markdown(std::ostream& out, const EstimationReport& report);

}  // namespace vm
