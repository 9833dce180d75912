#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vm/date.hpp"

namespace vm {

// The 19 cybersecurity-related Crunchbase tags used as sectors.
enum class SectorId : std::uint8_t {
  ArtificialIntelligence,
  Biometrics,
  Blockchain,
  CloudSecurity,
  CyberSecurity,
  ESignature,
  FacialRecognition,
  FraudDetection,
  InternetOfThings,
  IntrusionDetection,
  MachineLearning,
  NetworkSecurity,
  PenetrationTesting,
  Privacy,
  PrivateCloud,
  QrCodes,
  QuantumComputing,
  Security,
  SpamFiltering,
};

inline constexpr std::size_t kSectorCount = 19;

const std::array<SectorId, kSectorCount>& all_sectors();
std::string_view sector_name(SectorId s);
// Accepts the canonical name or any tag spelling that normalizes to it.
std::optional<SectorId> sector_from_name(std::string_view text);

using SectorSet = std::set<SectorId>;
using TagSet = std::set<std::string>;

// Lowercase, trim, and collapse runs of whitespace, hyphens and underscores to one space.
std::string normalize_tag(std::string_view tag);

struct Organization {
  std::string org_id;
  std::string name;
  std::string country;  // ISO-3166 alpha-2, upper case; empty when unknown
  TagSet tags;          // normalized
  SectorSet sectors;    // derived: tags ∩ taxonomy

  friend bool operator==(const Organization&, const Organization&) = default;
};

enum class Provenance : std::uint8_t { observed, imputed, missing };
std::string_view to_string(Provenance p);
std::optional<Provenance> provenance_from_string(std::string_view s);

enum class RoundType : std::uint8_t { seed, series_a, series_b, series_c_plus, debt, other };
std::string_view to_string(RoundType t);
RoundType round_type_from_string(std::string_view s);

struct FundingRound {
  std::string round_id;
  std::string org_id;
  Date date;
  double amount_musd = 0.0;
  std::optional<double> pmv_musd;
  Provenance pmv_provenance = Provenance::missing;
  int investor_count = 0;
  std::optional<int> lead_investor_rank;
  RoundType round_type = RoundType::other;

  friend bool operator==(const FundingRound&, const FundingRound&) = default;
};

enum class ExitKind : std::uint8_t { ipo, acquisition };
std::string_view to_string(ExitKind k);

struct ExitEvent {
  std::string org_id;
  Date date;
  ExitKind kind = ExitKind::ipo;
  // Absent while an imputed value is still pending.
  std::optional<double> exit_value_musd;
  Provenance value_provenance = Provenance::observed;

  bool pending_value() const { return !exit_value_musd.has_value(); }
  friend bool operator==(const ExitEvent&, const ExitEvent&) = default;
};

struct Rejection {
  std::size_t line = 0;
  std::string reason;
};

template <class T>
struct Parsed {
  std::vector<T> records;
  std::vector<Rejection> rejections;
  std::size_t input_rows = 0;  // data rows seen, header excluded
};

// Referential context for the round/exit parsers. A null pointer defers the check.
struct ParseContext {
  const std::vector<Organization>* organizations = nullptr;
  const std::vector<FundingRound>* rounds = nullptr;
  Date earliest = Date::from_ymd(1926, 1, 1);
  Date latest = Date::today();
};

SectorSet assign_sectors(const TagSet& tags);

Parsed<Organization> parse_organizations(std::istream& in);
// Output is ordered by (org_id, date, round_id). Accepts an optional trailing
// pmv_provenance column as written by the imputation stage.
Parsed<FundingRound> parse_funding_rounds(std::istream& in, const ParseContext& ctx = {});
// At most one exit per organization survives: the earliest. Later ones are rejected.
Parsed<ExitEvent> parse_exits(std::istream& in, const ParseContext& ctx = {});

void write_organizations(std::ostream& out, const std::vector<Organization>& orgs);
void write_funding_rounds(std::ostream& out, const std::vector<FundingRound>& rounds, bool with_provenance);
void write_exits(std::ostream& out, const std::vector<ExitEvent>& exits, bool with_provenance);
void write_rejections(std::ostream& out, const std::vector<Rejection>& rejections);

// Immutable bundle of the three entity sets with lookup indices.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<Organization> orgs, std::vector<FundingRound> rounds, std::vector<ExitEvent> exits);

  const std::vector<Organization>& organizations() const { return orgs_; }
  const std::vector<FundingRound>& rounds() const { return rounds_; }
  const std::vector<ExitEvent>& exits() const { return exits_; }

  const Organization* find_org(std::string_view org_id) const;
  const ExitEvent* find_exit(std::string_view org_id) const;
  // Indices into rounds(), ordered by (date, round_id).
  const std::vector<std::size_t>& rounds_of(std::string_view org_id) const;

 private:
  std::vector<Organization> orgs_;
  std::vector<FundingRound> rounds_;
  std::vector<ExitEvent> exits_;
  std::map<std::string, std::size_t, std::less<>> org_index_;
  std::map<std::string, std::size_t, std::less<>> exit_index_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> rounds_by_org_;
};

// Keeps rounds and exits dated inside the window; organizations are kept as is.
Dataset apply_window(const Dataset& data, const DateWindow& window);

}  // namespace vm
