#include "vm/returns.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "vm/csv.hpp"
#include "vm/error.hpp"

namespace vm {

std::string_view to_string(DilutionMode m) { return m == DilutionMode::standard ? "standard" : "as-printed"; }

DilutionMode dilution_mode_from_string(std::string_view s) {
  std::string t = normalize_tag(s);
  if (t == "standard") return DilutionMode::standard;
  if (t == "as printed") return DilutionMode::as_printed;
  throw ConfigError("unknown dilution mode '" + std::string(s) + "' (expected standard or as-printed)");
}

double dilution_stake(std::span<const RoundTerms> cascade, DilutionMode mode) {
  if (cascade.empty()) throw DomainError("dilution cascade is empty");
  for (const auto& r : cascade) {
    if (!(r.valuation > 0)) throw DomainError("post-money valuation must be positive");
  }
  const auto& entry = cascade.front();
  if (entry.money > entry.valuation) throw DomainError("stake exceeds 100%");
  double stake = entry.money / entry.valuation;
  for (std::size_t k = 1; k < cascade.size(); ++k) {
    double old_equity = mode == DilutionMode::standard ? cascade[k].valuation - cascade[k].money
                                                       : cascade[k - 1].valuation - cascade[k].money;
    stake *= old_equity / cascade[k].valuation;
  }
  return stake;
}

double return_to_exit(double stake, double exit_value, double money) {
  if (!(money > 0)) throw DomainError("money raised must be positive");
  if (!(exit_value > 0)) throw DomainError("exit value must be positive");
  return (exit_value * stake - money) / money;
}

double to_daily(double total_return, double holding_days) {
  if (!(holding_days >= 1)) throw DomainError("holding period must be at least one day");
  if (total_return <= -1.0) return -1.0;
  return std::pow(1.0 + total_return, 1.0 / holding_days) - 1.0;
}

double to_quarterly(double daily_rate, double days_per_quarter) {
  if (daily_rate <= -1.0) return -1.0;
  return std::pow(1.0 + daily_rate, days_per_quarter) - 1.0;
}

ReturnsResult compute_round_returns(const Dataset& data, const ReturnsConfig& config) {
  ReturnsResult result;
  auto& cov = result.coverage;
  for (const auto& exit : data.exits()) {
    ++cov.exits_total;
    if (exit.pending_value()) {
      ++cov.exits_without_value;
      continue;
    }
    std::vector<const FundingRound*> rounds;
    for (auto i : data.rounds_of(exit.org_id)) {
      if (data.rounds()[i].date <= exit.date) rounds.push_back(&data.rounds()[i]);
    }
    if (rounds.empty()) {
      ++cov.exits_without_rounds;
      continue;
    }
    const std::size_t entries = config.entry == EntryPolicy::first_round ? 1 : rounds.size();
    for (std::size_t i = 0; i < entries; ++i) {
      ++cov.entries_considered;
      const FundingRound& entry = *rounds[i];
      const int holding = exit.date - entry.date;
      if (holding < 1) {
        ++cov.non_positive_holding;
        continue;
      }
      if (!(entry.amount_musd > 0)) {
        ++cov.zero_amount;
        continue;
      }
      std::vector<RoundTerms> cascade;
      bool complete = true;
      for (std::size_t k = i; k < rounds.size(); ++k) {
        if (!rounds[k]->pmv_musd) {
          complete = false;
          break;
        }
        cascade.push_back({rounds[k]->amount_musd, *rounds[k]->pmv_musd});
      }
      if (!complete) {
        ++cov.missing_pmv;
        continue;
      }
      if (entry.amount_musd > *entry.pmv_musd) {
        ++cov.stake_over_100pct;
        continue;
      }
      double stake = dilution_stake(cascade, config.mode);
      RoundReturn rr;
      rr.org_id = entry.org_id;
      rr.round_id = entry.round_id;
      rr.entry_date = entry.date;
      rr.exit_date = exit.date;
      rr.holding_days = holding;
      rr.mode = config.mode;
      rr.R = return_to_exit(stake, *exit.exit_value_musd, entry.amount_musd);
      if (rr.R <= -1.0) {
        rr.total_loss = true;
        rr.r_d = -1.0;
        rr.r_q = -1.0;
        ++cov.total_losses;
      } else {
        rr.r_d = to_daily(rr.R, holding);
        rr.r_q = to_quarterly(rr.r_d, config.days_per_quarter);
      }
      ++cov.entries_used;
      result.returns.push_back(std::move(rr));
    }
  }
  std::stable_sort(result.returns.begin(), result.returns.end(), [](const RoundReturn& a, const RoundReturn& b) {
    return std::tie(a.org_id, a.entry_date, a.round_id) < std::tie(b.org_id, b.entry_date, b.round_id);
  });
  return result;
}

namespace {

struct Accumulator {
  double sum = 0.0;
  std::size_t count = 0;
};

std::vector<QuarterPoint> to_points(const std::map<int, Accumulator>& acc) {
  std::vector<QuarterPoint> pts;
  for (const auto& [idx, a] : acc) {
    pts.push_back({Quarter::from_index(idx), a.sum / static_cast<double>(a.count), a.count});
  }
  return pts;
}

}  // namespace

std::map<SectorId, QuarterlySectorSeries> sector_series(const std::vector<RoundReturn>& returns, const Dataset& data,
                                                        const QuarterGrid& grid) {
  std::map<SectorId, std::map<int, Accumulator>> acc;
  for (const auto& r : returns) {
    Quarter q = Quarter::of(r.exit_date);
    if (!grid.contains(q)) continue;
    const Organization* org = data.find_org(r.org_id);
    if (!org) continue;
    for (SectorId s : org->sectors) {
      auto& a = acc[s][q.index()];
      a.sum += r.r_q;
      ++a.count;
    }
  }
  std::map<SectorId, QuarterlySectorSeries> out;
  for (const auto& [s, per_q] : acc) out[s] = QuarterlySectorSeries{std::string(sector_name(s)), to_points(per_q)};
  return out;
}

QuarterlySectorSeries pooled_series(const std::vector<RoundReturn>& returns, const QuarterGrid& grid,
                                    const std::string& label) {
  std::map<int, Accumulator> acc;
  for (const auto& r : returns) {
    Quarter q = Quarter::of(r.exit_date);
    if (!grid.contains(q)) continue;
    auto& a = acc[q.index()];
    a.sum += r.r_q;
    ++a.count;
  }
  return QuarterlySectorSeries{label, to_points(acc)};
}

void write_round_returns(std::ostream& out, const std::vector<RoundReturn>& returns) {
  csv::write_row(out, {"org_id", "round_id", "entry_date", "exit_date", "holding_days", "R", "r_d", "r_q", "mode"});
  for (const auto& r : returns) {
    csv::write_row(out, {r.org_id, r.round_id, r.entry_date.to_string(), r.exit_date.to_string(),
                         std::to_string(r.holding_days), csv::format_double(r.R), csv::format_double(r.r_d),
                         csv::format_double(r.r_q), std::string(to_string(r.mode))});
  }
}

void write_sector_quarterly(std::ostream& out, const std::vector<QuarterlySectorSeries>& series) {
  csv::write_row(out, {"sector", "quarter", "mean_rq", "count"});
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      csv::write_row(out, {s.sector, p.quarter.to_string(), csv::format_double(p.mean_rq), std::to_string(p.count)});
    }
  }
}

}  // namespace vm
