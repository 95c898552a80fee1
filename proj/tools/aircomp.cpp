// Command-line driver: sweeps, single snapshots, fronthaul tables, selftest.

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "aircomp/config.hpp"
#include "aircomp/selftest.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitSelftest = 3;

std::atomic<bool> g_cancel{false};

extern "C" void on_sigint(int) { g_cancel.store(true); }

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
};

aircomp::ExperimentSpec load_spec(const CommonOptions& opts, std::optional<int> workers) {
  std::vector<std::string> overrides = opts.overrides;
  if (const char* seed = std::getenv("AIRCOMP_SEED"); seed && *seed) {
    overrides.push_back(std::string("seed=") + seed);
  }
  if (workers) overrides.push_back("workers=" + std::to_string(*workers));
  if (opts.config_path.empty()) {
    return aircomp::parse_config(nlohmann::json::object(), overrides);
  }
  return aircomp::parse_config(std::filesystem::path(opts.config_path), overrides);
}

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "JSON configuration file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--set", opts.overrides, "Override a config key, e.g. system.L=36")
      ->take_all();
}

void write(const std::vector<aircomp::MseRecord>& records, aircomp::OutputFormat format,
           const aircomp::ExperimentSpec& spec, bool partial, const std::string& out_path) {
  if (out_path.empty()) {
    aircomp::emit_results(records, format, spec, partial, std::cout);
  } else {
    aircomp::emit_results(records, format, spec, partial, std::filesystem::path(out_path));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AirComp simulator for cell-free massive MIMO"};
  app.require_subcommand(1);

  const std::map<std::string, aircomp::OutputFormat> formats{
      {"csv", aircomp::OutputFormat::kCsv}, {"json", aircomp::OutputFormat::kJson}};

  CommonOptions sweep_opts;
  std::string sweep_out;
  aircomp::OutputFormat sweep_format = aircomp::OutputFormat::kCsv;
  std::optional<int> sweep_workers;
  std::string cache_dir;
  auto* sweep_cmd = app.add_subcommand("sweep", "Average the MSE over snapshots and powers");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--out", sweep_out, "Output file (default: stdout)");
  sweep_cmd->add_option("--format", sweep_format, "csv or json")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case).description(""))
      ->option_text("csv|json (default csv)");
  sweep_cmd->add_option("--workers", sweep_workers, "Worker threads")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--cache", cache_dir, "Directory for cached snapshots");

  CommonOptions snap_opts;
  std::uint64_t snap_index = 0;
  std::string snap_out;
  aircomp::OutputFormat snap_format = aircomp::OutputFormat::kCsv;
  auto* snap_cmd = app.add_subcommand("snapshot", "Evaluate every level on one snapshot");
  add_common(snap_cmd, snap_opts);
  snap_cmd->add_option("--index", snap_index, "Snapshot index");
  snap_cmd->add_option("--out", snap_out, "Output file (default: stdout)");
  snap_cmd->add_option("--format", snap_format, "csv or json")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case).description(""))
      ->option_text("csv|json (default csv)");

  CommonOptions fh_opts;
  auto* fh_cmd = app.add_subcommand("fronthaul", "Fronthaul scalar counts per level");
  add_common(fh_cmd, fh_opts);

  auto* self_cmd = app.add_subcommand("selftest", "Run the fast invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (self_cmd->parsed()) {
    return aircomp::report_selftest(aircomp::run_selftest(), std::cout) ? kExitOk
                                                                        : kExitSelftest;
  }

  aircomp::ExperimentSpec spec;
  try {
    if (sweep_cmd->parsed()) spec = load_spec(sweep_opts, sweep_workers);
    if (snap_cmd->parsed()) spec = load_spec(snap_opts, std::nullopt);
    if (fh_cmd->parsed()) spec = load_spec(fh_opts, std::nullopt);
  } catch (const aircomp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (fh_cmd->parsed()) {
      std::cout << "level,to_cpu_per_block,to_aps_per_block,statistical\n";
      for (int level : {3, 2, 1}) {
        const aircomp::FronthaulCount c = aircomp::fronthaul_count(level, spec.base);
        std::cout << level << ',' << c.per_block_to_cpu.str() << ','
                  << c.per_block_to_aps.str() << ',' << c.statistical.str() << '\n';
      }
      return kExitOk;
    }
    if (snap_cmd->parsed()) {
      std::vector<aircomp::SnapshotResult> one{aircomp::run_snapshot(spec, snap_index)};
      spec.snapshots = 1;
      write(aircomp::fold_results(spec, std::move(one)), snap_format, spec, false, snap_out);
      return kExitOk;
    }
    std::signal(SIGINT, on_sigint);
    std::optional<aircomp::SnapshotCache> cache;
    if (!cache_dir.empty()) cache.emplace(cache_dir);
    const aircomp::SweepResult result =
        aircomp::sweep(spec, &g_cancel, cache ? &*cache : nullptr);
    if (result.partial) {
      std::cerr << "interrupted after " << result.snapshots_completed << " of "
                << spec.snapshots << " snapshots\n";
    }
    write(result.records, sweep_format, spec, result.partial, sweep_out);
    return kExitOk;
  } catch (const aircomp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
