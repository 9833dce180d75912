#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vm/config_file.hpp"
#include "vm/date.hpp"
#include "vm/econometrics.hpp"
#include "vm/impute.hpp"
#include "vm/ingest.hpp"
#include "vm/marketdata.hpp"
#include "vm/report.hpp"
#include "vm/returns.hpp"

namespace vm {

inline constexpr const char* kToolVersion = "0.1.0";

// Everything a run needs. Serialized as a TOML-style file; `out` and `log_level` are
// run-local and stay out of the serialized form so reruns elsewhere hash identically.
struct RunConfig {
  std::string organizations = "organizations.csv";
  std::string funding_rounds = "funding_rounds.csv";
  std::string exits = "exits.csv";
  std::string index = "index.csv";
  std::string tbill = "tbill.csv";

  DateWindow window{Date::from_ymd(2010, 1, 1), Date::from_ymd(2022, 5, 31)};

  DilutionMode dilution = DilutionMode::standard;
  double days_per_quarter = 365.25 / 4.0;
  EntryPolicy entry = EntryPolicy::every_round;

  std::optional<ImputerKind> imputer = ImputerKind::ridge;  // empty: passthrough, gaps stay missing
  std::uint64_t seed = 42;

  std::size_t min_quarters = 3;
  ConversionOrder order = ConversionOrder::quarterly_first;
  RateConversion riskfree = RateConversion::log_compound;

  ReportConfig report;

  std::string out = "out";
  std::string log_level = "info";

  std::string to_toml() const;
  KeyValues to_key_values() const;
  // Unknown keys and malformed values raise ConfigError.
  static RunConfig from_key_values(const KeyValues& kv);
};

// Precedence, lowest first: defaults, config file, VM_<SECTION>_<KEY> environment
// variables, explicit overrides (command-line flags). Relative input paths from the
// config file are resolved against the file's directory.
RunConfig resolve_config(const std::optional<std::string>& config_path, const std::map<std::string, std::string>& env,
                         const KeyValues& overrides);

// VM_* variables of the current process.
std::map<std::string, std::string> vm_environment();

std::string sha256_hex(const std::string& bytes);

// Reads a whole file; InputError names the path when it is missing or unreadable.
std::string read_file(const std::string& path);

// Collects artifacts written under one output directory plus the inputs consumed,
// and renders the manifest.
class ArtifactSink {
 public:
  explicit ArtifactSink(std::filesystem::path root);

  void write(const std::string& relative, const std::string& content);
  void note_input(const std::string& path, const std::string& bytes);
  const std::filesystem::path& root() const { return root_; }
  const std::vector<std::pair<std::string, std::string>>& artifacts() const { return artifacts_; }

  // Writes manifest.json (tool version, config hash, inputs, artifact hashes).
  void write_manifest(const std::string& command, const std::string& config_toml);

 private:
  struct InputRecord {
    std::string path;
    std::string sha256;
    std::size_t bytes = 0;
  };
  std::filesystem::path root_;
  std::vector<std::pair<std::string, std::string>> artifacts_;  // relative path, sha256
  std::vector<InputRecord> inputs_;
};

struct IngestStage {
  Parsed<Organization> organizations;
  Parsed<FundingRound> rounds;
  Parsed<ExitEvent> exits;
  Dataset data;  // after the sample window
};

struct ImputeStage {
  ImputeOutcome outcome;
  std::optional<FitResult> fit;
  std::string note;  // why no model was fitted, when it was not
};

struct ReturnsStage {
  ReturnsResult result;
  std::vector<QuarterlySectorSeries> series;  // canonical sector order, then "All sectors"
};

struct FitStage {
  MarketSeries market;
  EstimationReport estimation;
};

IngestStage run_ingest(const RunConfig& config, ArtifactSink* sink);
ImputeStage run_impute(const IngestStage& ingest, const RunConfig& config);
ReturnsStage run_returns(const Dataset& data, const RunConfig& config);
FitStage run_fit(const ReturnsStage& returns, const RunConfig& config, ArtifactSink* sink);
ReportTables run_report(const Dataset& data, const RunConfig& config);

void write_ingest_artifacts(ArtifactSink& sink, const IngestStage& stage, const RunConfig& config);
void write_impute_artifacts(ArtifactSink& sink, const ImputeStage& stage);
void write_returns_artifacts(ArtifactSink& sink, const ReturnsStage& stage);
void write_fit_artifacts(ArtifactSink& sink, const FitStage& stage);
void write_report_artifacts(ArtifactSink& sink, const ReportTables& tables);

enum class Command { ingest, impute, returns, fit, report, all };

// Runs the stages the command needs and writes that command's artifacts (every
// stage's for `all`) under config.out, with run_config.toml and manifest.json.
void run(Command command, const RunConfig& config);

}  // namespace vm
