#include "vm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vm/error.hpp"
#include "vm/special.hpp"

namespace vm {

namespace {

struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double var = 0.0;  // sample
};

Moments sample_moments(std::span<const double> v) {
  Moments m;
  m.n = static_cast<double>(v.size());
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / m.n;
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.var = v.size() > 1 ? ss / (m.n - 1.0) : 0.0;
  return m;
}

}  // namespace

std::optional<SummaryRow> summarize(std::span<const double> values, const std::string& sector) {
  if (values.empty()) return std::nullopt;
  SummaryRow row;
  row.sector = sector;
  row.n = values.size();
  row.total = std::accumulate(values.begin(), values.end(), 0.0);
  row.mean = row.total / static_cast<double>(row.n);
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  row.median = row.n % 2 ? sorted[row.n / 2] : 0.5 * (sorted[row.n / 2 - 1] + sorted[row.n / 2]);
  if (row.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - row.mean) * (v - row.mean);
    row.sd = std::sqrt(ss / static_cast<double>(row.n - 1));
  } else {
    row.sd_degenerate = true;
  }
  return row;
}

WelchResult welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw InsufficientData("Welch test needs at least 2 observations per sample");
  const Moments ma = sample_moments(a);
  const Moments mb = sample_moments(b);
  const double va = ma.var / ma.n;
  const double vb = mb.var / mb.n;
  WelchResult r;
  if (va + vb == 0.0) {
    if (ma.mean != mb.mean) throw DomainError("degenerate samples");
    r.t = 0.0;
    r.df = ma.n + mb.n - 2.0;
    r.p = 1.0;
    return r;
  }
  r.t = (ma.mean - mb.mean) / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) / (va * va / (ma.n - 1.0) + vb * vb / (mb.n - 1.0));
  r.p = student_t_two_sided_p(r.t, r.df);
  return r;
}

double student_pooled_t(std::span<const double> a, std::span<const double> b) {
  const Moments ma = sample_moments(a);
  const Moments mb = sample_moments(b);
  const double sp2 = ((ma.n - 1.0) * ma.var + (mb.n - 1.0) * mb.var) / (ma.n + mb.n - 2.0);
  return (ma.mean - mb.mean) / std::sqrt(sp2 * (1.0 / ma.n + 1.0 / mb.n));
}

TMatrix pairwise_matrix(const std::map<SectorId, std::vector<double>>& samples) {
  TMatrix m{};
  for (std::size_t r = 0; r < kSectorCount; ++r) {
    auto ra = samples.find(static_cast<SectorId>(r));
    if (ra == samples.end() || ra->second.size() < 2) continue;
    for (std::size_t c = r + 1; c < kSectorCount; ++c) {
      auto cb = samples.find(static_cast<SectorId>(c));
      if (cb == samples.end() || cb->second.size() < 2) continue;
      try {
        double t = welch_t(ra->second, cb->second).t;
        m[r][c] = t;
        m[c][r] = -t;
      } catch (const DomainError&) {
        // degenerate pair stays undefined
      }
    }
  }
  return m;
}

std::optional<TrendRow> percent_changes(std::span<const std::optional<double>> means, const std::string& sector,
                                        std::size_t max_missing) {
  TrendRow row;
  row.sector = sector;
  row.missing_quarters = static_cast<std::size_t>(std::count(means.begin(), means.end(), std::nullopt));
  const std::size_t present = means.size() - row.missing_quarters;
  if (row.missing_quarters > max_missing || present < 2) return std::nullopt;
  std::vector<double> pc;
  for (std::size_t q = 1; q < means.size(); ++q) {
    if (!means[q] || !means[q - 1]) continue;
    if (*means[q - 1] == 0.0) {
      ++row.skipped_zero_base;
      continue;
    }
    pc.push_back((*means[q] - *means[q - 1]) / *means[q - 1]);
  }
  row.changes = pc.size();
  if (pc.empty()) return row;
  const Moments m = sample_moments(pc);
  row.mean_pct = m.mean * 4.0 * 100.0;
  row.sd_pct = std::sqrt(m.var) * 2.0 * 100.0;
  return row;
}

TimeToExitStats time_to_exit_stats(const Dataset& data, std::size_t min_ipos) {
  TimeToExitStats out;
  std::map<SectorId, std::vector<double>> days;
  std::map<SectorId, std::vector<double>> investors;
  for (const auto& org : data.organizations()) {
    const auto& idx = data.rounds_of(org.org_id);
    for (auto i : idx) {
      for (SectorId s : org.sectors) investors[s].push_back(data.rounds()[i].investor_count);
    }
    const ExitEvent* ex = data.find_exit(org.org_id);
    if (!ex || ex->kind != ExitKind::ipo || idx.empty()) continue;
    const int d = ex->date - data.rounds()[idx.front()].date;
    out.detail.push_back({org.org_id, d});
    for (SectorId s : org.sectors) days[s].push_back(d);
  }
  for (SectorId s : all_sectors()) {
    if (!investors.contains(s) && !days.contains(s)) continue;
    TimeToExitRow row;
    row.sector = std::string(sector_name(s));
    if (auto it = investors.find(s); it != investors.end() && !it->second.empty()) {
      const Moments m = sample_moments(it->second);
      row.investors_mean = m.mean;
      row.investors_sd = std::sqrt(m.var);
    }
    if (auto it = days.find(s); it != days.end()) {
      row.n = it->second.size();
      if (row.n >= min_ipos && row.n > 0) {
        const Moments m = sample_moments(it->second);
        row.mean_days = m.mean;
        row.sd_days = std::sqrt(m.var);
        row.max_days = *std::max_element(it->second.begin(), it->second.end());
        row.min_days = *std::min_element(it->second.begin(), it->second.end());
      }
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

GeographyShare geography_shares(const Dataset& data, SectorId sector, std::size_t k) {
  std::map<std::string, double> by_country;
  double total = 0.0;
  for (const auto& r : data.rounds()) {
    const Organization* org = data.find_org(r.org_id);
    if (!org || !org->sectors.contains(sector)) continue;
    by_country[org->country.empty() ? "??" : org->country] += r.amount_musd;
    total += r.amount_musd;
  }
  GeographyShare g;
  g.sector = std::string(sector_name(sector));
  if (!(total > 0)) return g;
  std::vector<std::pair<std::string, double>> ranked(by_country.begin(), by_country.end());
  // map order already sorts by code, so a stable sort on amount breaks ties by code
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  double listed = 0.0;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) {
    const double share = ranked[i].second / total;
    g.top.emplace_back(ranked[i].first, share);
    listed += share;
  }
  g.has_other = ranked.size() > k;
  g.other = g.has_other ? 1.0 - listed : 0.0;
  if (g.has_other) {
    double rest = 0.0;
    for (std::size_t i = k; i < ranked.size(); ++i) rest += ranked[i].second;
    g.other = rest / total;
  }
  return g;
}

std::map<SectorId, std::vector<double>> funding_by_sector(const Dataset& data) {
  std::map<SectorId, std::vector<double>> out;
  for (const auto& r : data.rounds()) {
    const Organization* org = data.find_org(r.org_id);
    if (!org) continue;
    for (SectorId s : org->sectors) out[s].push_back(r.amount_musd);
  }
  return out;
}

std::map<SectorId, std::vector<double>> pmv_by_sector(const Dataset& data) {
  std::map<SectorId, std::vector<double>> out;
  for (const auto& r : data.rounds()) {
    if (!r.pmv_musd) continue;
    const Organization* org = data.find_org(r.org_id);
    if (!org) continue;
    for (SectorId s : org->sectors) out[s].push_back(*r.pmv_musd);
  }
  return out;
}

std::vector<std::optional<double>> quarterly_means(const Dataset& data, SectorId sector, const QuarterGrid& grid,
                                                   bool use_pmv) {
  std::vector<double> sum(grid.size(), 0.0);
  std::vector<std::size_t> count(grid.size(), 0);
  for (const auto& r : data.rounds()) {
    const Organization* org = data.find_org(r.org_id);
    if (!org || !org->sectors.contains(sector)) continue;
    const Quarter q = Quarter::of(r.date);
    if (!grid.contains(q)) continue;
    if (use_pmv && !r.pmv_musd) continue;
    const std::size_t pos = grid.position(q);
    sum[pos] += use_pmv ? *r.pmv_musd : r.amount_musd;
    ++count[pos];
  }
  std::vector<std::optional<double>> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (count[i]) out[i] = sum[i] / static_cast<double>(count[i]);
  }
  return out;
}

}  // namespace vm
