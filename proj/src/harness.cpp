#include "aircomp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace aircomp {

namespace {

constexpr std::pair<LevelTag, std::string_view> kLevelNames[] = {
    {LevelTag::kLevel3, "3"},
    {LevelTag::kLevel3NoTco, "3-noTCO"},
    {LevelTag::kLevel2, "2"},
    {LevelTag::kLevel1, "1"},
    {LevelTag::kCellular, "cellular"},
    {LevelTag::kCellularNoTco, "cellular-noTCO"},
};

bool is_cell_free(LevelTag level) {
  return level != LevelTag::kCellular && level != LevelTag::kCellularNoTco;
}

/// Everything a snapshot's levels share: the network, one realization and
/// its estimate.
struct Scenario {
  Snapshot snapshot;
  EstimationResult estimate;
};

Scenario prepare(const SystemConfig& config, const ExperimentSpec& spec, std::uint64_t index,
                 const std::vector<Point>& devices, const PilotAssignment& pilots,
                 Stream shadow_stream, Stream channel_stream, Stream noise_stream,
                 const SnapshotCache* cache) {
  std::optional<Snapshot> snap;
  if (cache) snap = cache->load(spec.seed, index, config);
  if (!snap) {
    Rng shadow_rng = make_rng(spec.seed, index, shadow_stream);
    snap = build_snapshot(config, devices, shadow_rng);
    if (cache) cache->store(spec.seed, index, config, *snap);
  }
  Rng channel_rng = make_rng(spec.seed, index, channel_stream);
  Rng noise_rng = make_rng(spec.seed, index, noise_stream);
  const ChannelRealization channels = sample_channels(*snap, channel_rng);
  EstimationResult est;
  if (spec.perfect_csi) {
    est = perfect_csi(channels, *snap);
  } else {
    const LinkBudget budget = LinkBudget::from(config);
    est = mmse_estimate(pilot_observation(channels, pilots, budget, noise_rng), *snap, pilots,
                        budget);
  }
  return {std::move(*snap), std::move(est)};
}

}  // namespace

std::string to_string(LevelTag level) {
  for (const auto& [tag, name] : kLevelNames) {
    if (tag == level) return std::string(name);
  }
  return "?";
}

std::optional<LevelTag> parse_level(std::string_view text) {
  for (const auto& [tag, name] : kLevelNames) {
    if (name == text) return tag;
  }
  return std::nullopt;
}

int ExperimentSpec::cellular_antenna_count() const {
  return cellular_antennas > 0 ? cellular_antennas : base.L * base.N;
}

void ExperimentSpec::validate() const {
  base.validate();
  if (power_grid_dbm.empty()) throw ConfigError("max_power_dbm", "power grid is empty");
  for (double p : power_grid_dbm) {
    if (!std::isfinite(p)) throw ConfigError("max_power_dbm", "power values must be finite");
  }
  if (!std::is_sorted(power_grid_dbm.begin(), power_grid_dbm.end())) {
    throw ConfigError("max_power_dbm", "power grid must be sorted ascending");
  }
  if (levels.empty()) throw ConfigError("levels", "at least one level is required");
  if (snapshots < 1) throw ConfigError("snapshots", "must be >= 1");
  if (trials_per_snapshot < 1) throw ConfigError("trials_per_snapshot", "must be >= 1");
  if (lsfd_samples < 1) throw ConfigError("lsfd_samples", "must be >= 1");
  if (workers < 1) throw ConfigError("workers", "must be >= 1");
  if (cellular_antennas < 0) throw ConfigError("cellular_antennas", "must be >= 0");
  if (optimizer.max_iter < 1) throw ConfigError("optimizer.max_iter", "must be >= 1");
  if (!(optimizer.rel_tol >= 0.0)) throw ConfigError("optimizer.rel_tol", "must be >= 0");
  if (orthogonal_pilots && base.tau_p < base.K) {
    throw ConfigError("pilots.orthogonal", "needs tau_p >= K");
  }
  if (perfect_csi) {
    for (LevelTag level : levels) {
      if (level == LevelTag::kLevel2 || level == LevelTag::kLevel1) {
        throw ConfigError("perfect_csi", "only supported for levels 3 and cellular");
      }
    }
  }
}

ExperimentSpec default_experiment() {
  ExperimentSpec spec;
  for (int p = -10; p <= 30; p += 5) spec.power_grid_dbm.push_back(p);
  spec.levels = {LevelTag::kLevel3,  LevelTag::kLevel3NoTco, LevelTag::kLevel2,
                 LevelTag::kLevel1, LevelTag::kCellular,    LevelTag::kCellularNoTco};
  return spec;
}

SystemConfig cellular_config(const ExperimentSpec& spec) {
  SystemConfig config = spec.base;
  config.L = 1;
  config.N = spec.cellular_antenna_count();
  config.placement = Placement::kCenter;
  return config;
}

SnapshotResult run_snapshot(const ExperimentSpec& spec, std::uint64_t index,
                            const SnapshotCache* cache) {
  using Clock = std::chrono::steady_clock;
  const SystemConfig& base = spec.base;
  const std::size_t n_levels = spec.levels.size();
  const std::size_t n_powers = spec.power_grid_dbm.size();

  SnapshotResult out;
  out.index = index;
  out.mse.assign(n_levels, std::vector<double>(n_powers, 0.0));
  out.seconds.assign(n_levels, 0.0);

  Rng topo_rng = make_rng(spec.seed, index, Stream::kTopology);
  const std::vector<Point> devices = generate_topology(base, topo_rng).device_positions;
  Rng pilot_rng = make_rng(spec.seed, index, Stream::kPilotAssignment);
  const PilotAssignment pilots =
      assign_pilots(base.K, base.tau_p, pilot_rng, spec.orthogonal_pilots);
  const LinkBudget budget = LinkBudget::from(base);
  const double noise = budget.noise_mw;

  const bool need_cell_free = std::ranges::any_of(spec.levels, is_cell_free);
  const bool need_cellular =
      std::ranges::any_of(spec.levels, [](LevelTag l) { return !is_cell_free(l); });
  std::optional<Scenario> cell_free;
  std::optional<Scenario> cellular;
  if (need_cell_free) {
    cell_free = prepare(base, spec, index, devices, pilots, Stream::kShadowing,
                        Stream::kChannels, Stream::kPilotNoise, cache);
  }
  if (need_cellular) {
    cellular = prepare(cellular_config(spec), spec, index, devices, pilots,
                       Stream::kCellularShadowing, Stream::kCellularChannels,
                       Stream::kCellularPilotNoise, cache);
  }

  for (std::size_t li = 0; li < n_levels; ++li) {
    const LevelTag level = spec.levels[li];
    const auto start = Clock::now();
    for (std::size_t pi = 0; pi < n_powers; ++pi) {
      const std::vector<double> max_power(base.K, dbm_to_mw(spec.power_grid_dbm[pi]));
      AltOptOptions opts = spec.optimizer;
      double mse = 0.0;
      switch (level) {
        case LevelTag::kLevel3:
        case LevelTag::kLevel3NoTco:
          opts.tco_enabled = level == LevelTag::kLevel3;
          mse = alternating_optimize(cell_free->estimate, max_power, noise, opts).mse();
          break;
        case LevelTag::kCellular:
        case LevelTag::kCellularNoTco:
          opts.tco_enabled = level == LevelTag::kCellular;
          mse = alternating_optimize(cellular->estimate, max_power, noise, opts).mse();
          break;
        case LevelTag::kLevel2: {
          Rng lsfd_rng = make_rng(spec.seed, index, Stream::kLsfdStatistics);
          Rng eval_rng = make_rng(spec.seed, index, Stream::kEvaluation);
          const Level2Options l2{spec.lsfd_samples, spec.level2_refine_b};
          const Level2Design design = design_level2(cell_free->snapshot, pilots,
                                                    cell_free->estimate, max_power, budget, l2,
                                                    lsfd_rng);
          mse = evaluate_level2(cell_free->snapshot, pilots, design, budget,
                                spec.trials_per_snapshot, eval_rng)
                    .mean;
          break;
        }
        case LevelTag::kLevel1: {
          Rng eval_rng = make_rng(spec.seed, index, Stream::kEvaluation);
          mse = evaluate_level1(cell_free->snapshot, pilots, full_power(max_power), budget,
                                spec.trials_per_snapshot, eval_rng)
                    .mean;
          break;
        }
      }
      out.mse[li][pi] = mse;
    }
    out.seconds[li] = std::chrono::duration<double>(Clock::now() - start).count();
  }
  return out;
}

std::vector<MseRecord> fold_results(const ExperimentSpec& spec,
                                    std::vector<SnapshotResult> results) {
  std::ranges::sort(results, {}, &SnapshotResult::index);
  const std::size_t n_levels = spec.levels.size();
  const std::size_t n_powers = spec.power_grid_dbm.size();
  const auto n = static_cast<double>(results.size());
  std::vector<MseRecord> records;
  records.reserve(n_levels * n_powers);
  for (std::size_t li = 0; li < n_levels; ++li) {
    double seconds = 0.0;
    for (const auto& r : results) seconds += r.seconds[li];
    for (std::size_t pi = 0; pi < n_powers; ++pi) {
      double sum = 0.0;
      for (const auto& r : results) sum += r.mse[li][pi];
      const double mean = results.empty() ? 0.0 : sum / n;
      double ss = 0.0;
      for (const auto& r : results) ss += (r.mse[li][pi] - mean) * (r.mse[li][pi] - mean);
      MseRecord rec;
      rec.level = spec.levels[li];
      rec.power_dbm = spec.power_grid_dbm[pi];
      rec.mse_mean = mean;
      rec.mse_stderr = results.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
      rec.snapshots_used = static_cast<int>(results.size());
      rec.wall_time_s = seconds / static_cast<double>(n_powers);
      records.push_back(rec);
    }
  }
  return records;
}

SweepResult sweep(const ExperimentSpec& spec, const std::atomic<bool>* cancel,
                  const SnapshotCache* cache) {
  spec.validate();
  const int total = spec.snapshots;
  const int workers = std::min(spec.workers, total);

  std::vector<std::optional<SnapshotResult>> slots(total);
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto work = [&] {
    for (;;) {
      if (failed.load() || (cancel && cancel->load())) return;
      const int index = next.fetch_add(1);
      if (index >= total) return;
      try {
        slots[index] = run_snapshot(spec, static_cast<std::uint64_t>(index), cache);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);

  std::vector<SnapshotResult> done;
  for (auto& slot : slots) {
    if (slot) done.push_back(std::move(*slot));
  }
  SweepResult result;
  result.snapshots_completed = static_cast<int>(done.size());
  result.partial = result.snapshots_completed < total;
  result.records = fold_results(spec, std::move(done));
  return result;
}

double mse_to_db(double mse) { return 10.0 * std::log10(mse); }

double gap_db(double worse_mse, double better_mse) {
  return mse_to_db(worse_mse) - mse_to_db(better_mse);
}

std::vector<SummaryRow> aggregate(const std::vector<MseRecord>& records) {
  std::vector<SummaryRow> rows;
  rows.reserve(records.size());
  for (const auto& r : records) {
    rows.push_back({r.level, r.power_dbm, r.mse_mean, mse_to_db(r.mse_mean), r.mse_stderr});
  }
  return rows;
}

}  // namespace aircomp
