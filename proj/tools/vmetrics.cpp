// vmetrics: venture returns pipeline driver.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "vm/config_file.hpp"
#include "vm/error.hpp"
#include "vm/ingest.hpp"
#include "vm/marketdata.hpp"
#include "vm/pipeline.hpp"
#include "vm/sim.hpp"

namespace {

struct RunFlags {
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<long long> seed;
  std::optional<std::string> dilution;
  std::optional<std::string> window;
  std::optional<long long> min_quarters;
  std::optional<std::string> organizations, funding_rounds, exits, index, tbill;
  std::optional<std::string> imputer;
  std::optional<std::string> log_level;

  vm::KeyValues overrides() const {
    vm::KeyValues kv;
    auto put = [&](const char* key, const auto& v) {
      if (!v) return;
      if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, std::string>) {
        kv.set(key, *v);
      } else {
        kv.set(key, std::to_string(*v));
      }
    };
    put("run.out", out);
    put("impute.seed", seed);
    put("returns.dilution", dilution);
    put("sample.window", window);
    put("fit.min_quarters", min_quarters);
    put("inputs.organizations", organizations);
    put("inputs.funding_rounds", funding_rounds);
    put("inputs.exits", exits);
    put("inputs.index", index);
    put("inputs.tbill", tbill);
    put("impute.kind", imputer);
    put("run.log_level", log_level);
    return kv;
  }
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "Run configuration file (TOML subset)");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--seed", f.seed, "Imputer seed");
  cmd->add_option("--dilution", f.dilution, "Dilution formula")->check(CLI::IsMember({"standard", "as-printed"}));
  cmd->add_option("--window", f.window, "Sample window, e.g. 2010-01-01:2022-05-31");
  cmd->add_option("--min-quarters", f.min_quarters, "Minimum quarters per sector fit");
  cmd->add_option("--organizations", f.organizations, "organizations.csv");
  cmd->add_option("--funding-rounds", f.funding_rounds, "funding_rounds.csv");
  cmd->add_option("--exits", f.exits, "exits.csv");
  cmd->add_option("--index", f.index, "Benchmark index levels (date,level)");
  cmd->add_option("--tbill", f.tbill, "T-Bill rates (date,rate_percent)");
  cmd->add_option("--imputer", f.imputer, "PMV imputer")->check(CLI::IsMember({"ridge", "knn", "none"}));
  cmd->add_option("--log-level", f.log_level, "trace, debug, info, warn, error, off");
}

void set_log_level(const std::string& level) { spdlog::set_level(spdlog::level::from_str(level)); }

void error_json(const std::string& kind, const std::string& message, const std::optional<std::string>& path) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  if (path) j["path"] = *path;
  std::cerr << j.dump() << "\n";
}

std::string to_text(const auto& writer) {
  std::ostringstream out;
  writer(out);
  return out.str();
}

void simulate(const std::optional<std::string>& spec_path, const std::string& out,
              const std::optional<long long>& seed) {
  vm::SimSpec spec;
  vm::ArtifactSink sink(out);
  if (spec_path) {
    const std::string text = vm::read_file(*spec_path);
    sink.note_input(*spec_path, text);
    spec = vm::SimSpec::from_config(vm::KeyValues::parse(text, *spec_path));
  }
  if (seed) spec.seed = static_cast<std::uint64_t>(*seed);
  spec.validate();
  const vm::SyntheticDataset ds = vm::simulate(spec);
  for (const auto& w : ds.warnings) spdlog::warn("simulate: {}", w);

  sink.write("organizations.csv", to_text([&](std::ostream& o) { vm::write_organizations(o, ds.organizations); }));
  sink.write("funding_rounds.csv", to_text([&](std::ostream& o) { vm::write_funding_rounds(o, ds.rounds, false); }));
  sink.write("exits.csv", to_text([&](std::ostream& o) { vm::write_exits(o, ds.exits, false); }));
  sink.write("index.csv", to_text([&](std::ostream& o) { vm::write_price_series(o, ds.index); }));
  sink.write("tbill.csv", to_text([&](std::ostream& o) { vm::write_rate_series(o, ds.tbill); }));
  sink.write("ground_truth.json", ds.ground_truth_json());
  const std::string toml = spec.to_toml();
  sink.write("spec.toml", toml);
  sink.write_manifest("simulate", toml);
  spdlog::info("simulate: {} firms, {} rounds, {} exits written to {}", ds.organizations.size(), ds.rounds.size(),
               ds.exits.size(), out);
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("vmetrics"));
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Venture returns pipeline: ingest, impute, returns, fit, report, simulate"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(vm::kToolVersion));

  RunFlags flags;
  struct Stage {
    const char* name;
    const char* help;
    vm::Command command;
  };
  const Stage stages[] = {
      {"ingest", "Parse and validate inputs, write clean CSVs and rejects", vm::Command::ingest},
      {"impute", "Fill missing post-money valuations", vm::Command::impute},
      {"returns", "Dilution-adjusted returns to exit and sector quarterly series", vm::Command::returns},
      {"fit", "Per-sector log market model and implied performance", vm::Command::fit},
      {"report", "Descriptive tables and Welch t tests", vm::Command::report},
      {"all", "Every stage in sequence", vm::Command::all},
  };
  std::optional<vm::Command> chosen;
  for (const auto& s : stages) {
    CLI::App* cmd = app.add_subcommand(s.name, s.help);
    add_run_flags(cmd, flags);
    cmd->callback([&chosen, c = s.command] { chosen = c; });
  }

  std::optional<std::string> spec_path;
  std::string sim_out = "simulated";
  std::optional<long long> sim_seed;
  std::string sim_log = "info";
  CLI::App* sim = app.add_subcommand("simulate", "Write a synthetic dataset with known parameters");
  sim->add_option("--spec", spec_path, "Simulation spec (TOML subset)");
  sim->add_option("--out", sim_out, "Output directory");
  sim->add_option("--seed", sim_seed, "Override the spec seed");
  sim->add_option("--log-level", sim_log, "trace, debug, info, warn, error, off");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      set_log_level(sim_log);
      simulate(spec_path, sim_out, sim_seed);
      return EXIT_SUCCESS;
    }
    if (flags.log_level) set_log_level(*flags.log_level);
    const vm::RunConfig config = vm::resolve_config(flags.config, vm::vm_environment(), flags.overrides());
    set_log_level(config.log_level);
    vm::run(*chosen, config);
    return EXIT_SUCCESS;
  } catch (const vm::InputError& e) {
    error_json(e.kind(), e.what(), e.path());
    return 2;
  } catch (const vm::Error& e) {
    error_json(e.kind(), e.what(), std::nullopt);
    return 1;
  } catch (const std::exception& e) {
    error_json("internal_error", e.what(), std::nullopt);
    return 1;
  }
}
