#include "vm/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <tuple>

#include "vm/csv.hpp"
#include "vm/error.hpp"

namespace vm {

namespace {

constexpr std::array<std::string_view, kSectorCount> kSectorNames = {
    "Artificial Intelligence", "Biometrics",         "Blockchain",       "Cloud Security",
    "Cyber Security",          "E-Signature",        "Facial Recognition", "Fraud Detection",
    "Internet of Things",      "Intrusion Detection", "Machine Learning", "Network Security",
    "Penetration Testing",     "Privacy",            "Private Cloud",    "QR Codes",
    "Quantum Computing",       "Security",           "Spam Filtering",
};

const std::vector<std::string> kOrgHeader = {"org_id", "name", "country_code", "tags"};
const std::vector<std::string> kRoundHeader = {"round_id",     "org_id",         "date",
                                               "amount_musd",  "pmv_musd",       "investor_count",
                                               "lead_investor_rank", "round_type"};
const std::vector<std::string> kExitHeader = {"org_id", "date", "kind", "exit_value_musd"};

const std::map<std::string, SectorId, std::less<>>& tag_lookup() {
  static const auto table = [] {
    std::map<std::string, SectorId, std::less<>> m;
    for (std::size_t i = 0; i < kSectorCount; ++i) {
      m.emplace(normalize_tag(kSectorNames[i]), static_cast<SectorId>(i));
    }
    return m;
  }();
  return table;
}

bool is_country_code(const std::string& s) {
  return s.size() == 2 && std::isupper(static_cast<unsigned char>(s[0])) &&
         std::isupper(static_cast<unsigned char>(s[1]));
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string field_count_reason(std::size_t expected, std::size_t got) {
  return "expected " + std::to_string(expected) + " fields, got " + std::to_string(got);
}

// Empty optional means the referential check is deferred.
std::optional<std::set<std::string, std::less<>>> org_ids(const ParseContext& ctx) {
  if (!ctx.organizations) return std::nullopt;
  std::set<std::string, std::less<>> ids;
  for (const auto& o : *ctx.organizations) ids.insert(o.org_id);
  return ids;
}

bool known_org(const std::optional<std::set<std::string, std::less<>>>& ids, const std::string& org_id) {
  return !ids || ids->contains(org_id);
}

// Returns a rejection reason, or empty when the date is acceptable.
std::string check_date(const std::string& text, const ParseContext& ctx, std::optional<Date>& out) {
  out = Date::parse(csv::trim(text));
  if (!out) return "invalid date '" + text + "'";
  if (*out < ctx.earliest || ctx.latest < *out) {
    return "date " + out->to_string() + " outside [" + ctx.earliest.to_string() + ", " +
           ctx.latest.to_string() + "]";
  }
  return {};
}

std::string join_tags(const TagSet& tags) {
  std::string out;
  for (const auto& t : tags) {
    if (!out.empty()) out.push_back(';');
    out += t;
  }
  return out;
}

}  // namespace

const std::array<SectorId, kSectorCount>& all_sectors() {
  static const auto list = [] {
    std::array<SectorId, kSectorCount> a{};
    for (std::size_t i = 0; i < kSectorCount; ++i) a[i] = static_cast<SectorId>(i);
    return a;
  }();
  return list;
}

std::string_view sector_name(SectorId s) { return kSectorNames[static_cast<std::size_t>(s)]; }

std::optional<SectorId> sector_from_name(std::string_view text) {
  const auto& table = tag_lookup();
  auto it = table.find(normalize_tag(text));
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::string normalize_tag(std::string_view tag) {
  std::string out;
  bool pending_sep = false;
  for (char raw : tag) {
    auto c = static_cast<unsigned char>(raw);
    if (std::isspace(c) || c == '-' || c == '_') {
      pending_sep = true;
      continue;
    }
    if (pending_sep && !out.empty()) out.push_back(' ');
    pending_sep = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::observed: return "observed";
    case Provenance::imputed: return "imputed";
    case Provenance::missing: return "missing";
  }
  return "missing";
}

std::optional<Provenance> provenance_from_string(std::string_view s) {
  std::string t = csv::lower(csv::trim(s));
  if (t == "observed") return Provenance::observed;
  if (t == "imputed") return Provenance::imputed;
  if (t == "missing") return Provenance::missing;
  return std::nullopt;
}

std::string_view to_string(RoundType t) {
  switch (t) {
    case RoundType::seed: return "seed";
    case RoundType::series_a: return "series_a";
    case RoundType::series_b: return "series_b";
    case RoundType::series_c_plus: return "series_c_plus";
    case RoundType::debt: return "debt";
    case RoundType::other: return "other";
  }
  return "other";
}

RoundType round_type_from_string(std::string_view s) {
  std::string t = normalize_tag(s);
  if (t == "seed" || t == "pre seed" || t == "angel") return RoundType::seed;
  if (t == "series a" || t == "a") return RoundType::series_a;
  if (t == "series b" || t == "b") return RoundType::series_b;
  if (t == "series c plus" || t == "series c" || t == "series d" || t == "series e" || t == "series f" ||
      t == "c" || t == "c+") {
    return RoundType::series_c_plus;
  }
  if (t == "debt" || t == "debt financing" || t == "convertible note") return RoundType::debt;
  return RoundType::other;
}

std::string_view to_string(ExitKind k) { return k == ExitKind::ipo ? "ipo" : "acquisition"; }

SectorSet assign_sectors(const TagSet& tags) {
  SectorSet out;
  const auto& table = tag_lookup();
  for (const auto& t : tags) {
    auto it = table.find(normalize_tag(t));
    if (it != table.end()) out.insert(it->second);
  }
  return out;
}

Parsed<Organization> parse_organizations(std::istream& in) {
  auto rows = csv::read(in);
  if (rows.empty()) throw ParseError(1, "organizations file is empty");
  csv::expect_header(rows.front(), kOrgHeader, "organizations");

  Parsed<Organization> out;
  std::set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    ++out.input_rows;
    auto reject = [&](std::string reason) { out.rejections.push_back({row.line, std::move(reason)}); };
    if (row.fields.size() != kOrgHeader.size()) {
      reject(field_count_reason(kOrgHeader.size(), row.fields.size()));
      continue;
    }
    Organization org;
    org.org_id = csv::trim(row.fields[0]);
    org.name = csv::trim(row.fields[1]);
    org.country = upper(csv::trim(row.fields[2]));
    if (org.org_id.empty()) {
      reject("empty org_id");
      continue;
    }
    if (!org.country.empty() && !is_country_code(org.country)) {
      reject("invalid country code '" + row.fields[2] + "'");
      continue;
    }
    if (!seen.insert(org.org_id).second) {
      reject("duplicate org_id '" + org.org_id + "'");
      continue;
    }
    std::string_view tags = row.fields[3];
    std::size_t start = 0;
    while (start <= tags.size()) {
      auto semi = tags.find(';', start);
      auto piece = tags.substr(start, semi == std::string_view::npos ? std::string_view::npos : semi - start);
      auto norm = normalize_tag(piece);
      if (!norm.empty()) org.tags.insert(std::move(norm));
      if (semi == std::string_view::npos) break;
      start = semi + 1;
    }
    org.sectors = assign_sectors(org.tags);
    out.records.push_back(std::move(org));
  }
  return out;
}

Parsed<FundingRound> parse_funding_rounds(std::istream& in, const ParseContext& ctx) {
  auto rows = csv::read(in);
  if (rows.empty()) throw ParseError(1, "funding rounds file is empty");
  bool with_provenance = rows.front().fields.size() == kRoundHeader.size() + 1;
  auto header = kRoundHeader;
  if (with_provenance) header.push_back("pmv_provenance");
  csv::expect_header(rows.front(), header, "funding rounds");

  Parsed<FundingRound> out;
  const auto ids = org_ids(ctx);
  std::set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const auto& f = row.fields;
    ++out.input_rows;
    auto reject = [&](std::string reason) { out.rejections.push_back({row.line, std::move(reason)}); };
    if (f.size() != header.size()) {
      reject(field_count_reason(header.size(), f.size()));
      continue;
    }
    FundingRound round;
    round.round_id = csv::trim(f[0]);
    round.org_id = csv::trim(f[1]);
    if (round.round_id.empty()) {
      reject("empty round_id");
      continue;
    }
    if (round.org_id.empty()) {
      reject("empty org_id");
      continue;
    }
    if (!known_org(ids, round.org_id)) {
      reject("unknown org_id '" + round.org_id + "'");
      continue;
    }
    std::optional<Date> date;
    if (auto why = check_date(f[2], ctx, date); !why.empty()) {
      reject(why);
      continue;
    }
    round.date = *date;

    auto amount = csv::parse_double(f[3]);
    if (!amount) {
      reject(csv::trim(f[3]).empty() ? "missing amount" : "invalid amount '" + f[3] + "'");
      continue;
    }
    if (!std::isfinite(*amount)) {
      reject("non-finite amount");
      continue;
    }
    if (*amount < 0) {
      reject("negative amount");
      continue;
    }
    round.amount_musd = *amount;

    if (!csv::trim(f[4]).empty()) {
      auto pmv = csv::parse_double(f[4]);
      if (!pmv || !std::isfinite(*pmv) || *pmv <= 0) {
        reject("post-money valuation must be a positive number, got '" + f[4] + "'");
        continue;
      }
      round.pmv_musd = *pmv;
    }

    if (!csv::trim(f[5]).empty()) {
      auto n = csv::parse_int(f[5]);
      if (!n || *n < 0) {
        reject("investor_count must be a non-negative integer");
        continue;
      }
      round.investor_count = static_cast<int>(*n);
    }
    if (!csv::trim(f[6]).empty()) {
      auto rank = csv::parse_int(f[6]);
      if (!rank || *rank < 1) {
        reject("lead_investor_rank must be an integer >= 1");
        continue;
      }
      round.lead_investor_rank = static_cast<int>(*rank);
    }
    round.round_type = round_type_from_string(f[7]);

    if (with_provenance) {
      auto p = provenance_from_string(f[8]);
      if (!p) {
        reject("invalid pmv_provenance '" + f[8] + "'");
        continue;
      }
      if ((*p == Provenance::missing) == round.pmv_musd.has_value()) {
        reject("pmv_provenance '" + std::string(to_string(*p)) + "' inconsistent with pmv_musd");
        continue;
      }
      round.pmv_provenance = *p;
    } else {
      round.pmv_provenance = round.pmv_musd ? Provenance::observed : Provenance::missing;
    }

    if (!seen.insert(round.round_id).second) {
      reject("duplicate round_id '" + round.round_id + "'");
      continue;
    }
    out.records.push_back(std::move(round));
  }
  std::stable_sort(out.records.begin(), out.records.end(), [](const FundingRound& a, const FundingRound& b) {
    return std::tie(a.org_id, a.date, a.round_id) < std::tie(b.org_id, b.date, b.round_id);
  });
  return out;
}

Parsed<ExitEvent> parse_exits(std::istream& in, const ParseContext& ctx) {
  auto rows = csv::read(in);
  if (rows.empty()) throw ParseError(1, "exits file is empty");
  bool with_provenance = rows.front().fields.size() == kExitHeader.size() + 1;
  auto header = kExitHeader;
  if (with_provenance) header.push_back("value_provenance");
  csv::expect_header(rows.front(), header, "exits");

  std::map<std::string, Date> last_round;
  if (ctx.rounds) {
    for (const auto& r : *ctx.rounds) {
      auto [it, inserted] = last_round.emplace(r.org_id, r.date);
      if (!inserted && it->second < r.date) it->second = r.date;
    }
  }

  Parsed<ExitEvent> out;
  const auto ids = org_ids(ctx);
  struct Candidate {
    ExitEvent event;
    std::size_t line;
  };
  std::map<std::string, Candidate> kept;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const auto& f = row.fields;
    ++out.input_rows;
    auto reject = [&](std::size_t line, std::string reason) { out.rejections.push_back({line, std::move(reason)}); };
    if (f.size() != header.size()) {
      reject(row.line, field_count_reason(header.size(), f.size()));
      continue;
    }
    ExitEvent ev;
    ev.org_id = csv::trim(f[0]);
    if (ev.org_id.empty()) {
      reject(row.line, "empty org_id");
      continue;
    }
    if (!known_org(ids, ev.org_id)) {
      reject(row.line, "unknown org_id '" + ev.org_id + "'");
      continue;
    }
    std::optional<Date> date;
    if (auto why = check_date(f[1], ctx, date); !why.empty()) {
      reject(row.line, why);
      continue;
    }
    ev.date = *date;
    std::string kind = normalize_tag(f[2]);
    if (kind == "ipo") {
      ev.kind = ExitKind::ipo;
    } else if (kind == "acquisition" || kind == "acquired" || kind == "merger") {
      ev.kind = ExitKind::acquisition;
    } else {
      reject(row.line, "unknown exit kind '" + f[2] + "'");
      continue;
    }
    if (csv::trim(f[3]).empty()) {
      ev.value_provenance = Provenance::imputed;  // placeholder, value filled by imputation
    } else {
      auto v = csv::parse_double(f[3]);
      if (!v || !std::isfinite(*v) || *v <= 0) {
        reject(row.line, "exit value must be a positive number, got '" + f[3] + "'");
        continue;
      }
      ev.exit_value_musd = *v;
      ev.value_provenance = Provenance::observed;
    }
    if (with_provenance) {
      auto p = provenance_from_string(f[4]);
      if (!p || *p == Provenance::missing) {
        reject(row.line, "invalid value_provenance '" + f[4] + "'");
        continue;
      }
      if (*p == Provenance::observed && !ev.exit_value_musd) {
        reject(row.line, "value_provenance 'observed' without a value");
        continue;
      }
      ev.value_provenance = *p;
    }
    if (auto it = last_round.find(ev.org_id); it != last_round.end() && ev.date < it->second) {
      reject(row.line, "exit precedes financing history");
      continue;
    }
    auto it = kept.find(ev.org_id);
    if (it == kept.end()) {
      std::string key = ev.org_id;
      kept.emplace(std::move(key), Candidate{std::move(ev), row.line});
    } else if (ev.date < it->second.event.date) {
      reject(it->second.line, "later exit for organization; earliest retained");
      it->second = Candidate{std::move(ev), row.line};
    } else {
      reject(row.line, "later exit for organization; earliest retained");
    }
  }
  for (auto& [id, c] : kept) out.records.push_back(std::move(c.event));
  std::sort(out.rejections.begin(), out.rejections.end(),
            [](const Rejection& a, const Rejection& b) { return a.line < b.line; });
  return out;
}

void write_organizations(std::ostream& out, const std::vector<Organization>& orgs) {
  csv::write_row(out, kOrgHeader);
  for (const auto& o : orgs) csv::write_row(out, {o.org_id, o.name, o.country, join_tags(o.tags)});
}

void write_funding_rounds(std::ostream& out, const std::vector<FundingRound>& rounds, bool with_provenance) {
  auto header = kRoundHeader;
  if (with_provenance) header.push_back("pmv_provenance");
  csv::write_row(out, header);
  for (const auto& r : rounds) {
    std::vector<std::string> row = {
        r.round_id,
        r.org_id,
        r.date.to_string(),
        csv::format_double(r.amount_musd),
        r.pmv_musd ? csv::format_double(*r.pmv_musd) : std::string(),
        std::to_string(r.investor_count),
        r.lead_investor_rank ? std::to_string(*r.lead_investor_rank) : std::string(),
        std::string(to_string(r.round_type)),
    };
    if (with_provenance) row.emplace_back(to_string(r.pmv_provenance));
    csv::write_row(out, row);
  }
}

void write_exits(std::ostream& out, const std::vector<ExitEvent>& exits, bool with_provenance) {
  auto header = kExitHeader;
  if (with_provenance) header.push_back("value_provenance");
  csv::write_row(out, header);
  for (const auto& e : exits) {
    std::vector<std::string> row = {
        e.org_id,
        e.date.to_string(),
        std::string(to_string(e.kind)),
        e.exit_value_musd ? csv::format_double(*e.exit_value_musd) : std::string(),
    };
    if (with_provenance) row.emplace_back(to_string(e.value_provenance));
    csv::write_row(out, row);
  }
}

void write_rejections(std::ostream& out, const std::vector<Rejection>& rejections) {
  csv::write_row(out, {"line", "reason"});
  for (const auto& r : rejections) csv::write_row(out, {std::to_string(r.line), r.reason});
}

Dataset::Dataset(std::vector<Organization> orgs, std::vector<FundingRound> rounds, std::vector<ExitEvent> exits)
    : orgs_(std::move(orgs)), rounds_(std::move(rounds)), exits_(std::move(exits)) {
  for (std::size_t i = 0; i < orgs_.size(); ++i) {
    if (!org_index_.emplace(orgs_[i].org_id, i).second) {
      throw DomainError("duplicate org_id in dataset: " + orgs_[i].org_id);
    }
  }
  for (std::size_t i = 0; i < exits_.size(); ++i) {
    if (!exit_index_.emplace(exits_[i].org_id, i).second) {
      throw DomainError("more than one exit for org_id " + exits_[i].org_id);
    }
  }
  for (std::size_t i = 0; i < rounds_.size(); ++i) rounds_by_org_[rounds_[i].org_id].push_back(i);
  for (auto& [org, idx] : rounds_by_org_) {
    std::stable_sort(idx.begin(), idx.end(), [this](std::size_t a, std::size_t b) {
      return std::tie(rounds_[a].date, rounds_[a].round_id) < std::tie(rounds_[b].date, rounds_[b].round_id);
    });
  }
}

const Organization* Dataset::find_org(std::string_view org_id) const {
  auto it = org_index_.find(org_id);
  return it == org_index_.end() ? nullptr : &orgs_[it->second];
}

const ExitEvent* Dataset::find_exit(std::string_view org_id) const {
  auto it = exit_index_.find(org_id);
  return it == exit_index_.end() ? nullptr : &exits_[it->second];
}

const std::vector<std::size_t>& Dataset::rounds_of(std::string_view org_id) const {
  static const std::vector<std::size_t> empty;
  auto it = rounds_by_org_.find(org_id);
  return it == rounds_by_org_.end() ? empty : it->second;
}

Dataset apply_window(const Dataset& data, const DateWindow& window) {
  std::vector<FundingRound> rounds;
  for (const auto& r : data.rounds()) {
    if (window.contains(r.date)) rounds.push_back(r);
  }
  std::vector<ExitEvent> exits;
  for (const auto& e : data.exits()) {
    if (window.contains(e.date)) exits.push_back(e);
  }
  return Dataset(data.organizations(), std::move(rounds), std::move(exits));
}

}  // namespace vm
