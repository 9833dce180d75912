#include "vm/econometrics.hpp"

#include <cmath>
#include <map>

#include "vm/csv.hpp"
#include "vm/error.hpp"
#include "vm/special.hpp"

namespace vm {

OlsResult ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("regression inputs must have equal length");
  const std::size_t n = x.size();
  if (n < 3) throw InsufficientData("regression needs at least 3 observations, got " + std::to_string(n));
  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xbar += x[i];
    ybar += y[i];
  }
  xbar /= static_cast<double>(n);
  ybar /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - xbar) * (x[i] - xbar);
    sxy += (x[i] - xbar) * (y[i] - ybar);
  }
  if (!(sxx > 0)) throw InsufficientData("regressor has no variation");

  OlsResult r;
  r.n = n;
  r.slope = sxy / sxx;
  r.intercept = ybar - r.slope * xbar;
  r.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.residuals[i] = y[i] - r.intercept - r.slope * x[i];
    r.ssr += r.residuals[i] * r.residuals[i];
  }
  const double s2 = r.ssr / static_cast<double>(n - 2);
  r.sigma = std::sqrt(s2);
  r.se_slope = std::sqrt(s2 / sxx);
  r.se_intercept = std::sqrt(s2 * (1.0 / static_cast<double>(n) + xbar * xbar / sxx));
  r.cov_intercept_slope = -xbar * s2 / sxx;
  return r;
}

LogModelFit fit_log_model(const QuarterlySectorSeries& series, const MarketSeries& market, std::size_t min_quarters) {
  LogModelFit fit;
  fit.sector = series.sector;
  std::vector<double> x, y;
  for (const auto& p : series.points) {
    if (!market.grid.contains(p.quarter)) continue;
    if (p.mean_rq <= -1.0) {
      ++fit.dropped_total_loss;
      continue;
    }
    const std::size_t pos = market.grid.position(p.quarter);
    const double rf = market.ln_rf[pos];
    y.push_back(std::log1p(p.mean_rq) - rf);
    x.push_back(market.ln_rm[pos] - rf);
    fit.quarters.push_back(p.quarter);
  }
  const std::size_t needed = std::max<std::size_t>(min_quarters, 3);
  if (y.size() < needed) {
    throw InsufficientData(series.sector + ": " + std::to_string(y.size()) + " usable quarters, need " +
                           std::to_string(needed));
  }
  OlsResult r = ols(x, y);
  fit.gamma = r.intercept;
  fit.delta = r.slope;
  fit.sigma = r.sigma;
  fit.se_gamma = r.se_intercept;
  fit.se_delta = r.se_slope;
  fit.cov_gamma_delta = r.cov_intercept_slope;
  fit.n_obs = r.n;
  const double df = static_cast<double>(r.n - 2);
  auto p_value = [df](double est, double se) {
    if (se > 0) return student_t_two_sided_p(est / se, df);
    return est == 0.0 ? 1.0 : 0.0;
  };
  fit.p_gamma = p_value(fit.gamma, fit.se_gamma);
  fit.p_delta = p_value(fit.delta, fit.se_delta);
  return fit;
}

MarketMoments moments_over(const LogModelFit& fit, const MarketSeries& market) {
  std::vector<double> rm, rf;
  for (Quarter q : fit.quarters) {
    rm.push_back(market.ln_rm[market.grid.position(q)]);
    rf.push_back(market.ln_rf[market.grid.position(q)]);
  }
  return market_moments(rm, rf);
}

double expected_log_return(const LogModelFit& fit, const MarketMoments& mm) {
  return fit.gamma + mm.mu_ln_rf + fit.delta * (mm.mu_ln_rm - mm.mu_ln_rf);
}

double log_return_variance(const LogModelFit& fit, const MarketMoments& mm) {
  return fit.delta * fit.delta * mm.var_ln_rm + fit.sigma * fit.sigma;
}

ArithmeticMoments arithmetic_moments(double mu, double var) {
  ArithmeticMoments m;
  m.mean = std::expm1(mu + 0.5 * var);
  m.variance = std::expm1(var) * (m.mean + 1.0) * (m.mean + 1.0);
  return m;
}

AlphaBeta implied_alpha_beta(const LogModelFit& fit, const MarketMoments& mm, const ArithmeticMoments& market) {
  const auto sector = arithmetic_moments(expected_log_return(fit, mm), log_return_variance(fit, mm));
  const double gross_ratio = (1.0 + sector.mean) / (1.0 + market.mean);
  AlphaBeta ab;
  if (mm.var_ln_rm > 0) {
    ab.beta = gross_ratio * std::expm1(fit.delta * mm.var_ln_rm) / std::expm1(mm.var_ln_rm);
  } else {
    ab.beta = gross_ratio * fit.delta;  // limit of the ratio as the market variance vanishes
  }
  const double rf = std::expm1(mm.mu_ln_rf);
  ab.alpha_net = sector.mean - rf - ab.beta * (market.mean - rf);
  ab.alpha_gross = 1.0 + ab.alpha_net;
  return ab;
}

AlphaBeta implied_alpha_beta(const LogModelFit& fit, const MarketMoments& mm) {
  return implied_alpha_beta(fit, mm, arithmetic_moments(mm.mu_ln_rm, mm.var_ln_rm));
}

double annualize(double per_quarter, AnnualizeKind) { return per_quarter * 4.0 * 100.0; }

ImpliedPerformance implied_performance(const LogModelFit& fit, const MarketMoments& mm, ConversionOrder order) {
  ImpliedPerformance ip;
  ip.e_ln_r = expected_log_return(fit, mm);
  ip.v_ln_r = log_return_variance(fit, mm);
  const auto sector = arithmetic_moments(ip.e_ln_r, ip.v_ln_r);
  const auto market = arithmetic_moments(mm.mu_ln_rm, mm.var_ln_rm);
  ip.e_R = sector.mean;
  ip.v_R = sector.variance;
  ip.e_Rm = market.mean;
  ip.rf = std::expm1(mm.mu_ln_rf);
  const auto ab = implied_alpha_beta(fit, mm, market);
  ip.beta = ab.beta;
  ip.alpha_net = ab.alpha_net;
  ip.alpha_gross = ab.alpha_gross;

  const double premium = mm.mu_ln_rm - mm.mu_ln_rf;
  const double var_e = fit.se_gamma * fit.se_gamma + premium * premium * fit.se_delta * fit.se_delta +
                       2.0 * premium * fit.cov_gamma_delta;
  ip.se_e_ln_r = std::sqrt(std::max(var_e, 0.0));
  ip.se_e_R = (1.0 + ip.e_R) * ip.se_e_ln_r;

  ip.e_ln_r_ann_pct = annualize(ip.e_ln_r, AnnualizeKind::log_mean);
  ip.se_e_ln_r_ann_pct = annualize(ip.se_e_ln_r, AnnualizeKind::log_mean);
  ip.v_ln_r_ann_pct = annualize(ip.v_ln_r, AnnualizeKind::variance);
  if (order == ConversionOrder::quarterly_first) {
    ip.e_R_ann_pct = annualize(ip.e_R, AnnualizeKind::rate);
    ip.se_e_R_ann_pct = annualize(ip.se_e_R, AnnualizeKind::rate);
    ip.v_R_ann_pct = annualize(ip.v_R, AnnualizeKind::variance);
  } else {
    const auto annual = arithmetic_moments(4.0 * ip.e_ln_r, 4.0 * ip.v_ln_r);
    ip.e_R_ann_pct = 100.0 * annual.mean;
    ip.se_e_R_ann_pct = 100.0 * (1.0 + annual.mean) * 4.0 * ip.se_e_ln_r;
    ip.v_R_ann_pct = 100.0 * annual.variance;
  }
  return ip;
}

std::string significance_stars(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.10) return "*";
  return "";
}

EstimationReport estimate_sectors(const std::vector<QuarterlySectorSeries>& series, const MarketSeries& market,
                                  const EstimationConfig& config) {
  EstimationReport report;
  for (const auto& s : series) {
    try {
      SectorEstimate est;
      est.fit = fit_log_model(s, market, config.min_quarters);
      est.moments = moments_over(est.fit, market);
      est.implied = implied_performance(est.fit, est.moments, config.order);
      report.estimates.push_back(std::move(est));
    } catch (const InsufficientData& e) {
      report.skipped.emplace_back(s.sector, e.what());
    }
  }
  return report;
}

void write_fits_csv(std::ostream& out, const std::vector<SectorEstimate>& estimates) {
  csv::write_row(out, {"sector", "gamma", "se_gamma", "delta", "se_delta", "sigma_pct", "alpha_gross", "beta", "n_obs"});
  for (const auto& e : estimates) {
    const auto& f = e.fit;
    csv::write_row(out, {f.sector, csv::format_double(f.gamma), csv::format_double(f.se_gamma),
                         csv::format_double(f.delta), csv::format_double(f.se_delta),
                         csv::format_double(f.sigma * 100.0), csv::format_double(e.implied.alpha_gross),
                         csv::format_double(e.implied.beta), std::to_string(f.n_obs)});
  }
}

void write_implied_csv(std::ostream& out, const std::vector<SectorEstimate>& estimates) {
  csv::write_row(out, {"sector", "e_ln_r_ann_pct", "se", "e_R_ann_pct", "se"});
  for (const auto& e : estimates) {
    const auto& ip = e.implied;
    csv::write_row(out, {e.fit.sector, csv::format_double(ip.e_ln_r_ann_pct), csv::format_double(ip.se_e_ln_r_ann_pct),
                         csv::format_double(ip.e_R_ann_pct), csv::format_double(ip.se_e_R_ann_pct)});
  }
}

void write_fits_markdown(std::ostream& out, const EstimationReport& report) {
  auto f2 = [](double v) { return csv::format_fixed(v, 2); };
  out << "## Log model estimates\n\n";
  out << "| Sector | gamma | se(gamma) | delta | se(delta) | sigma (%) | alpha | beta | quarters |\n";
  out << "|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& e : report.estimates) {
    const auto& f = e.fit;
    out << "| " << f.sector << " | " << f2(f.gamma) << significance_stars(f.p_gamma) << " | " << f2(f.se_gamma)
        << " | " << f2(f.delta) << significance_stars(f.p_delta) << " | " << f2(f.se_delta) << " | "
        << f2(f.sigma * 100.0) << " | " << f2(e.implied.alpha_gross) << " | " << f2(e.implied.beta) << " | "
        << f.n_obs << " |\n";
  }
  out << "\n*** / ** / * : significant at the 1% / 5% / 10% level (two-sided t test).\n\n";
  out << "## Implied expected returns (annualized, %)\n\n";
  out << "| Sector | E[ln R] | se(E[ln R]) | E[R] | se(E[R]) |\n|---|---|---|---|---|\n";
  for (const auto& e : report.estimates) {
    const auto& ip = e.implied;
    out << "| " << e.fit.sector << " | " << f2(ip.e_ln_r_ann_pct) << " | " << f2(ip.se_e_ln_r_ann_pct) << " | "
        << f2(ip.e_R_ann_pct) << " | " << f2(ip.se_e_R_ann_pct) << " |\n";
  }
  if (!report.skipped.empty()) {
    out << "\nSkipped:\n\n";
    for (const auto& [sector, why] : report.skipped) out << "- " << sector << ": " << why << "\n";
  }
}

}  // namespace vm
