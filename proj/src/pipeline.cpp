#include "vm/pipeline.hpp"

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <array>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "vm/csv.hpp"
#include "vm/error.hpp"

extern char** environ;

namespace vm {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "inputs.organizations", "inputs.funding_rounds", "inputs.exits",  "inputs.index",
      "inputs.tbill",         "sample.window",         "returns.dilution", "returns.days_per_quarter",
      "returns.entry",        "impute.kind",           "impute.seed",   "fit.min_quarters",
      "fit.order",            "fit.riskfree",          "report.max_missing_quarters",
      "report.min_ipos",      "report.geo_top",        "run.out",       "run.log_level",
  };
  return keys;
}

bool is_input_key(const std::string& key) { return key.rfind("inputs.", 0) == 0; }

std::string_view to_string(ImputerKind k) { return k == ImputerKind::ridge ? "ridge" : "knn"; }
std::string_view to_string(EntryPolicy e) { return e == EntryPolicy::every_round ? "every-round" : "first-round"; }
std::string_view to_string(ConversionOrder o) {
  return o == ConversionOrder::quarterly_first ? "quarterly-first" : "annual-first";
}
std::string_view to_string(RateConversion r) { return r == RateConversion::log_compound ? "log-compound" : "simple"; }

template <class T>
T pick(const std::string& key, const std::string& value, std::initializer_list<std::pair<const char*, T>> options) {
  for (const auto& [name, v] : options) {
    if (value == name) return v;
  }
  std::string allowed;
  for (const auto& o : options) allowed += (allowed.empty() ? "" : ", ") + std::string(o.first);
  throw ConfigError(key + " must be one of {" + allowed + "}, got '" + value + "'");
}

std::size_t non_negative(const KeyValues& kv, const char* key, std::size_t fallback) {
  auto v = kv.get_int(key);
  if (!v) return fallback;
  if (*v < 0) throw ConfigError(std::string(key) + " must be non-negative");
  return static_cast<std::size_t>(*v);
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

std::string to_text(const auto& writer) {
  std::ostringstream out;
  writer(out);
  return out.str();
}

template <class T>
json parse_counts(const Parsed<T>& p) {
  json j;
  j["input_rows"] = p.input_rows;
  j["accepted"] = p.records.size();
  j["rejected"] = p.rejections.size();
  return j;
}

}  // namespace

std::string RunConfig::to_toml() const {
  std::ostringstream out;
  auto q = [](const std::string& s) { return "\"" + s + "\""; };
  out << "[inputs]\n"
      << "organizations = " << q(organizations) << "\n"
      << "funding_rounds = " << q(funding_rounds) << "\n"
      << "exits = " << q(exits) << "\n"
      << "index = " << q(index) << "\n"
      << "tbill = " << q(tbill) << "\n\n"
      << "[sample]\n"
      << "window = " << q(window.to_string()) << "\n\n"
      << "[returns]\n"
      << "dilution = " << q(std::string(to_string(dilution))) << "\n"
      << "days_per_quarter = " << csv::format_double(days_per_quarter) << "\n"
      << "entry = " << q(std::string(to_string(entry))) << "\n\n"
      << "[impute]\n"
      << "kind = " << q(imputer ? std::string(to_string(*imputer)) : "none") << "\n"
      << "seed = " << seed << "\n\n"
      << "[fit]\n"
      << "min_quarters = " << min_quarters << "\n"
      << "order = " << q(std::string(to_string(order))) << "\n"
      << "riskfree = " << q(std::string(to_string(riskfree))) << "\n\n"
      << "[report]\n"
      << "max_missing_quarters = " << report.max_missing_quarters << "\n"
      << "min_ipos = " << report.min_ipos << "\n"
      << "geo_top = " << report.geo_top << "\n";
  return out.str();
}

KeyValues RunConfig::to_key_values() const {
  KeyValues kv = KeyValues::parse(to_toml(), "<defaults>");
  kv.set("run.out", out);
  kv.set("run.log_level", log_level);
  return kv;
}

RunConfig RunConfig::from_key_values(const KeyValues& kv) {
  for (const auto& [key, value] : kv.entries()) {
    if (!known_keys().contains(key)) throw ConfigError("unknown configuration key '" + key + "'");
  }
  RunConfig c;
  auto str = [&](const char* key, std::string& field) {
    if (auto v = kv.get(key)) field = *v;
  };
  str("inputs.organizations", c.organizations);
  str("inputs.funding_rounds", c.funding_rounds);
  str("inputs.exits", c.exits);
  str("inputs.index", c.index);
  str("inputs.tbill", c.tbill);
  if (auto v = kv.get("sample.window")) c.window = DateWindow::parse(*v);
  if (auto v = kv.get("returns.dilution")) c.dilution = dilution_mode_from_string(*v);
  if (auto v = kv.get_double("returns.days_per_quarter")) {
    if (!(*v > 0)) throw ConfigError("returns.days_per_quarter must be positive");
    c.days_per_quarter = *v;
  }
  if (auto v = kv.get("returns.entry")) {
    c.entry = pick<EntryPolicy>("returns.entry", *v,
                                {{"every-round", EntryPolicy::every_round}, {"first-round", EntryPolicy::first_round}});
  }
  if (auto v = kv.get("impute.kind")) {
    c.imputer = pick<std::optional<ImputerKind>>(
        "impute.kind", *v, {{"ridge", ImputerKind::ridge}, {"knn", ImputerKind::knn}, {"none", std::nullopt}});
  }
  if (auto v = kv.get_int("impute.seed")) c.seed = static_cast<std::uint64_t>(*v);
  c.min_quarters = non_negative(kv, "fit.min_quarters", c.min_quarters);
  if (c.min_quarters < 3) throw ConfigError("fit.min_quarters must be at least 3");
  if (auto v = kv.get("fit.order")) {
    c.order = pick<ConversionOrder>("fit.order", *v,
                                    {{"quarterly-first", ConversionOrder::quarterly_first},
                                     {"annual-first", ConversionOrder::annual_first}});
  }
  if (auto v = kv.get("fit.riskfree")) {
    c.riskfree = pick<RateConversion>("fit.riskfree", *v,
                                      {{"log-compound", RateConversion::log_compound}, {"simple", RateConversion::simple}});
  }
  c.report.max_missing_quarters = non_negative(kv, "report.max_missing_quarters", c.report.max_missing_quarters);
  c.report.min_ipos = non_negative(kv, "report.min_ipos", c.report.min_ipos);
  c.report.geo_top = non_negative(kv, "report.geo_top", c.report.geo_top);
  str("run.out", c.out);
  str("run.log_level", c.log_level);
  pick<int>("run.log_level", c.log_level,
            {{"trace", 0}, {"debug", 0}, {"info", 0}, {"warn", 0}, {"error", 0}, {"off", 0}});
  return c;
}

RunConfig resolve_config(const std::optional<std::string>& config_path, const std::map<std::string, std::string>& env,
                         const KeyValues& overrides) {
  KeyValues merged = RunConfig{}.to_key_values();
  if (config_path) {
    const KeyValues file = KeyValues::load(*config_path);
    const fs::path base = fs::path(*config_path).parent_path();
    for (const auto& [key, value] : file.entries()) {
      if (is_input_key(key) && fs::path(value).is_relative()) {
        merged.set(key, (base / value).lexically_normal().string());
      } else {
        merged.set(key, value);
      }
    }
  }
  for (const auto& [name, value] : env) {
    // VM_<SECTION>_<KEY>: the section is the first token, the key keeps its underscores
    if (name.rfind("VM_", 0) != 0) continue;
    const std::string rest = csv::lower(name.substr(3));
    const auto sep = rest.find('_');
    if (sep == std::string::npos) continue;
    const std::string key = rest.substr(0, sep) + "." + rest.substr(sep + 1);
    if (!known_keys().contains(key)) {
      spdlog::warn("ignoring environment variable {}: no configuration key {}", name, key);
      continue;
    }
    merged.set(key, value);
  }
  for (const auto& [key, value] : overrides.entries()) merged.set(key, value);
  return RunConfig::from_key_values(merged);
}

std::map<std::string, std::string> vm_environment() {
  std::map<std::string, std::string> out;
  for (char** e = environ; e && *e; ++e) {
    std::string_view entry(*e);
    if (entry.rfind("VM_", 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    out.emplace(std::string(entry.substr(0, eq)), std::string(entry.substr(eq + 1)));
  }
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("internal_error", "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw InputError(path, "input file not found");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path, "cannot open input file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ArtifactSink::ArtifactSink(fs::path root) : root_(std::move(root)) {}

void ArtifactSink::write(const std::string& relative, const std::string& content) {
  const fs::path target = root_ / relative;
  fs::create_directories(target.parent_path());
  std::ofstream out(target, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("output_error", "cannot write " + target.string());
  out << content;
  if (!out) throw Error("output_error", "write failed for " + target.string());
  artifacts_.emplace_back(relative, sha256_hex(content));
}

void ArtifactSink::note_input(const std::string& path, const std::string& bytes) {
  inputs_.push_back({path, sha256_hex(bytes), bytes.size()});
}

void ArtifactSink::write_manifest(const std::string& command, const std::string& config_toml) {
  json j;
  j["tool"] = "vmetrics";
  j["version"] = kToolVersion;
  j["command"] = command;
  j["config_sha256"] = sha256_hex(config_toml);
  j["inputs"] = json::array();
  for (const auto& in : inputs_) j["inputs"].push_back({{"path", in.path}, {"sha256", in.sha256}, {"bytes", in.bytes}});
  j["artifacts"] = json::array();
  for (const auto& [path, sha] : artifacts_) j["artifacts"].push_back({{"path", path}, {"sha256", sha}});
  const std::string text = j.dump(2) + "\n";
  const fs::path target = root_ / "manifest.json";
  fs::create_directories(root_);
  std::ofstream out(target, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error("output_error", "cannot write " + target.string());
}

IngestStage run_ingest(const RunConfig& config, ArtifactSink* sink) {
  auto load = [&](const std::string& path) {
    std::string bytes = read_file(path);
    if (sink) sink->note_input(path, bytes);
    return bytes;
  };
  const std::string org_text = load(config.organizations);
  const std::string round_text = load(config.funding_rounds);
  const std::string exit_text = load(config.exits);

  IngestStage s;
  auto with_path = [](const std::string& path, auto&& parse) {
    try {
      return parse();
    } catch (const ParseError& e) {
      throw Error("parse_error", path + ": " + e.what());
    }
  };
  {
    std::istringstream in(org_text);
    s.organizations = with_path(config.organizations, [&] { return parse_organizations(in); });
  }
  ParseContext ctx;
  ctx.organizations = &s.organizations.records;
  {
    std::istringstream in(round_text);
    s.rounds = with_path(config.funding_rounds, [&] { return parse_funding_rounds(in, ctx); });
  }
  ctx.rounds = &s.rounds.records;
  {
    std::istringstream in(exit_text);
    s.exits = with_path(config.exits, [&] { return parse_exits(in, ctx); });
  }
  const Dataset full(s.organizations.records, s.rounds.records, s.exits.records);
  s.data = apply_window(full, config.window);
  spdlog::info("ingest: {} organizations, {} rounds, {} exits accepted; {} rejections; {} rounds and {} exits in window {}",
               s.organizations.records.size(), s.rounds.records.size(), s.exits.records.size(),
               s.organizations.rejections.size() + s.rounds.rejections.size() + s.exits.rejections.size(),
               s.data.rounds().size(), s.data.exits().size(), config.window.to_string());
  return s;
}

ImputeStage run_impute(const IngestStage& ingest, const RunConfig& config) {
  const Dataset& data = ingest.data;
  std::size_t missing_rounds = 0;
  for (const auto& r : data.rounds()) missing_rounds += r.pmv_musd ? 0 : 1;
  std::size_t pending_exits = 0;
  for (const auto& e : data.exits()) pending_exits += e.pending_value() ? 1 : 0;

  ImputeStage s;
  s.outcome.data = data;
  if (missing_rounds == 0 && pending_exits == 0) {
    s.note = "no missing valuations";
  } else if (!config.imputer) {
    s.note = "passthrough mode: missing valuations left empty";
    s.outcome.exits_unresolved = pending_exits;
  } else {
    ImputerConfig ic;
    ic.kind = *config.imputer;
    ic.seed = config.seed;
    s.fit = fit_imputer(labeled_rows(data), ic);
    s.outcome = impute_dataset(data, s.fit->model);
  }
  spdlog::info("impute: {} rounds and {} exit values imputed, {} exits unresolved{}", s.outcome.rounds_imputed,
               s.outcome.exits_imputed, s.outcome.exits_unresolved, s.note.empty() ? "" : " (" + s.note + ")");
  return s;
}

ReturnsStage run_returns(const Dataset& data, const RunConfig& config) {
  ReturnsConfig rc;
  rc.mode = config.dilution;
  rc.days_per_quarter = config.days_per_quarter;
  rc.entry = config.entry;
  ReturnsStage s;
  s.result = compute_round_returns(data, rc);
  const QuarterGrid grid = QuarterGrid::covering(config.window);
  auto by_sector = sector_series(s.result.returns, data, grid);
  for (SectorId id : all_sectors()) {
    if (auto it = by_sector.find(id); it != by_sector.end()) s.series.push_back(std::move(it->second));
  }
  s.series.push_back(pooled_series(s.result.returns, grid));
  spdlog::info("returns: {} round returns from {} exits ({} entries considered)", s.result.returns.size(),
               s.result.coverage.exits_total, s.result.coverage.entries_considered);
  return s;
}

FitStage run_fit(const ReturnsStage& returns, const RunConfig& config, ArtifactSink* sink) {
  auto load = [&](const std::string& path) {
    std::string bytes = read_file(path);
    if (sink) sink->note_input(path, bytes);
    return bytes;
  };
  std::istringstream index_in(load(config.index));
  std::istringstream tbill_in(load(config.tbill));
  const PriceSeries index = parse_price_series(index_in);
  const RateSeries tbill = parse_rate_series(tbill_in);
  FitStage s{build_market_series(index, tbill, QuarterGrid::covering(config.window), config.riskfree), {}};
  EstimationConfig ec;
  ec.min_quarters = config.min_quarters;
  ec.order = config.order;
  s.estimation = estimate_sectors(returns.series, s.market, ec);
  spdlog::info("fit: {} series estimated, {} skipped", s.estimation.estimates.size(), s.estimation.skipped.size());
  return s;
}

ReportTables run_report(const Dataset& data, const RunConfig& config) {
  return build_report(data, QuarterGrid::covering(config.window), config.report);
}

void write_ingest_artifacts(ArtifactSink& sink, const IngestStage& s, const RunConfig& config) {
  const Dataset& d = s.data;
  sink.write("ingest/organizations.csv", to_text([&](std::ostream& o) { write_organizations(o, d.organizations()); }));
  sink.write("ingest/funding_rounds.csv",
             to_text([&](std::ostream& o) { write_funding_rounds(o, d.rounds(), true); }));
  sink.write("ingest/exits.csv", to_text([&](std::ostream& o) { write_exits(o, d.exits(), true); }));
  auto rejects = [&](const std::string& input, const std::vector<Rejection>& r) {
    sink.write("ingest/" + stem_of(input) + ".rejects.csv", to_text([&](std::ostream& o) { write_rejections(o, r); }));
  };
  rejects(config.organizations, s.organizations.rejections);
  rejects(config.funding_rounds, s.rounds.rejections);
  rejects(config.exits, s.exits.rejections);
  json j;
  j["organizations"] = parse_counts(s.organizations);
  j["funding_rounds"] = parse_counts(s.rounds);
  j["exits"] = parse_counts(s.exits);
  j["window"] = config.window.to_string();
  j["rounds_in_window"] = d.rounds().size();
  j["exits_in_window"] = d.exits().size();
  sink.write("ingest/summary.json", j.dump(2) + "\n");
}

void write_impute_artifacts(ArtifactSink& sink, const ImputeStage& s) {
  const Dataset& d = s.outcome.data;
  sink.write("impute/organizations.csv", to_text([&](std::ostream& o) { write_organizations(o, d.organizations()); }));
  sink.write("impute/funding_rounds.csv",
             to_text([&](std::ostream& o) { write_funding_rounds(o, d.rounds(), true); }));
  sink.write("impute/exits.csv", to_text([&](std::ostream& o) { write_exits(o, d.exits(), true); }));
  json j;
  j["rounds_imputed"] = s.outcome.rounds_imputed;
  j["exits_imputed"] = s.outcome.exits_imputed;
  j["exits_unresolved"] = s.outcome.exits_unresolved;
  if (s.fit) {
    const auto& r = s.fit->report;
    sink.write("impute/imputer.model", s.fit->model.to_json());
    j["holdout_mae_log"] = r.holdout_mae;
    j["holdout_median_ae_log"] = r.holdout_median_ae;
    j["n_train"] = r.n_train;
    j["n_holdout"] = r.n_holdout;
    j["selected_lambda"] = r.selected_lambda;
    json sectors = json::object();
    for (const auto& [name, mae] : r.sector_mae) {
      sectors[name] = {{"mae_log", mae}, {"n", r.sector_count.at(name)}};
    }
    j["holdout_by_sector"] = sectors;
  } else {
    j["note"] = s.note;
  }
  sink.write("impute/report.json", j.dump(2) + "\n");
}

void write_returns_artifacts(ArtifactSink& sink, const ReturnsStage& s) {
  sink.write("returns/round_returns.csv",
             to_text([&](std::ostream& o) { write_round_returns(o, s.result.returns); }));
  sink.write("returns/sector_quarterly.csv", to_text([&](std::ostream& o) { write_sector_quarterly(o, s.series); }));
  const auto& c = s.result.coverage;
  json j;
  j["exits_total"] = c.exits_total;
  j["exits_without_value"] = c.exits_without_value;
  j["exits_without_rounds"] = c.exits_without_rounds;
  j["entries_considered"] = c.entries_considered;
  j["entries_used"] = c.entries_used;
  j["missing_pmv"] = c.missing_pmv;
  j["zero_amount"] = c.zero_amount;
  j["stake_over_100pct"] = c.stake_over_100pct;
  j["non_positive_holding"] = c.non_positive_holding;
  j["total_losses"] = c.total_losses;
  sink.write("returns/coverage.json", j.dump(2) + "\n");
}

void write_fit_artifacts(ArtifactSink& sink, const FitStage& s) {
  const auto& est = s.estimation.estimates;
  sink.write("fit/fits.csv", to_text([&](std::ostream& o) { write_fits_csv(o, est); }));
  sink.write("fit/implied.csv", to_text([&](std::ostream& o) { write_implied_csv(o, est); }));
  sink.write("fit/fits.md", to_text([&](std::ostream& o) { write_fits_markdown(o, s.estimation); }));
  sink.write("fit/market_quarterly.csv", to_text([&](std::ostream& o) {
               csv::write_row(o, {"quarter", "ln_rm", "ln_rf"});
               for (std::size_t i = 0; i < s.market.grid.size(); ++i) {
                 csv::write_row(o, {s.market.grid.at(i).to_string(), csv::format_double(s.market.ln_rm[i]),
                                    csv::format_double(s.market.ln_rf[i])});
               }
             }));
}

void write_report_artifacts(ArtifactSink& sink, const ReportTables& t) {
  sink.write("report/table2.csv", to_text([&](std::ostream& o) { write_summary_csv(o, t.summary); }));
  sink.write("report/ttest_funding.csv", to_text([&](std::ostream& o) { write_tmatrix_csv(o, t.ttest_funding); }));
  sink.write("report/ttest_pmv.csv", to_text([&](std::ostream& o) { write_tmatrix_csv(o, t.ttest_pmv); }));
  sink.write("report/trends.csv", to_text([&](std::ostream& o) { write_trends_csv(o, t.trends); }));
  sink.write("report/time_to_ipo.csv", to_text([&](std::ostream& o) { write_time_to_ipo_csv(o, t.time_to_ipo); }));
  sink.write("report/time_to_ipo_detail.csv",
             to_text([&](std::ostream& o) { write_time_to_ipo_detail_csv(o, t.time_to_ipo); }));
  sink.write("report/geo_shares.csv", to_text([&](std::ostream& o) { write_geo_shares_csv(o, t.geography); }));
  sink.write("report/report.md", to_text([&](std::ostream& o) { write_report_markdown(o, t); }));
}

void run(Command command, const RunConfig& config) {
  static constexpr std::array<const char*, 6> kNames{"ingest", "impute", "returns", "fit", "report", "all"};
  const std::string name = kNames[static_cast<std::size_t>(command)];
  const bool all = command == Command::all;
  ArtifactSink sink(config.out);

  const IngestStage ingest = run_ingest(config, &sink);
  if (all || command == Command::ingest) write_ingest_artifacts(sink, ingest, config);
  if (all || command == Command::report) write_report_artifacts(sink, run_report(ingest.data, config));

  if (all || command == Command::impute || command == Command::returns || command == Command::fit) {
    const ImputeStage impute = run_impute(ingest, config);
    if (all || command == Command::impute) write_impute_artifacts(sink, impute);
    if (all || command == Command::returns || command == Command::fit) {
      const ReturnsStage returns = run_returns(impute.outcome.data, config);
      if (all || command == Command::returns) write_returns_artifacts(sink, returns);
      if (all || command == Command::fit) write_fit_artifacts(sink, run_fit(returns, config, &sink));
    }
  }

  const std::string toml = config.to_toml();
  sink.write("run_config.toml", toml);
  sink.write_manifest(name, toml);
  spdlog::info("{}: {} artifacts written to {}", name, sink.artifacts().size(), config.out);
}

}  // namespace vm
