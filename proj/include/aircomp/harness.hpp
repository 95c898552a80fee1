#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aircomp/designs.hpp"

namespace aircomp {

enum class LevelTag {
  kLevel3,
  kLevel3NoTco,
  kLevel2,
  kLevel1,
  kCellular,
  kCellularNoTco,
};

std::string to_string(LevelTag level);
/// Accepts "3", "3-noTCO", "2", "1", "cellular", "cellular-noTCO".
std::optional<LevelTag> parse_level(std::string_view text);

struct ExperimentSpec {
  SystemConfig base;
  std::vector<double> power_grid_dbm;
  std::vector<LevelTag> levels;
  int snapshots = 200;
  int trials_per_snapshot = 50;
  int lsfd_samples = 500;
  std::uint64_t seed = 1;
  int workers = 1;
  /// Antennas of the cellular base station; 0 means L * N of the cell-free
  /// network.
  int cellular_antennas = 0;
  bool orthogonal_pilots = false;
  /// Genie channel knowledge for the centralized levels (3 and cellular).
  bool perfect_csi = false;
  AltOptOptions optimizer;
  bool level2_refine_b = false;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  int cellular_antenna_count() const;
};

/// L=144, N=1, K=20, tau_p=20, all six levels over -10..30 dBm.
ExperimentSpec default_experiment();

/// Scenario used for the cellular baseline: one BS at the center with the
/// full antenna budget, same propagation constants.
SystemConfig cellular_config(const ExperimentSpec& spec);

class SnapshotCache;

/// mse[level][power] for one snapshot index, levels and powers in spec order.
struct SnapshotResult {
  std::uint64_t index = 0;
  std::vector<std::vector<double>> mse;
  std::vector<double> seconds;  // per level
};

/// Deterministic given (spec.seed, index): builds the snapshot, assigns
/// pilots, draws one channel/pilot-noise realization, estimates, and then
/// evaluates every requested level at every power. All power points reuse
/// the same random draws.
SnapshotResult run_snapshot(const ExperimentSpec& spec, std::uint64_t index,
                            const SnapshotCache* cache = nullptr);

struct MseRecord {
  LevelTag level = LevelTag::kLevel3;
  double power_dbm = 0.0;
  double mse_mean = 0.0;
  double mse_stderr = 0.0;
  int snapshots_used = 0;
  double wall_time_s = 0.0;
};

struct SweepResult {
  std::vector<MseRecord> records;  // level-major, powers ascending
  bool partial = false;
  int snapshots_completed = 0;
};

/// Averages run_snapshot over spec.snapshots indices on spec.workers threads.
/// If `cancel` becomes true, no new snapshots are started and the records
/// cover the completed ones (partial = true).
SweepResult sweep(const ExperimentSpec& spec, const std::atomic<bool>* cancel = nullptr,
                  const SnapshotCache* cache = nullptr);

/// Folds per-snapshot results (any order) into records, by ascending index.
std::vector<MseRecord> fold_results(const ExperimentSpec& spec,
                                    std::vector<SnapshotResult> results);

struct SummaryRow {
  LevelTag level = LevelTag::kLevel3;
  double power_dbm = 0.0;
  double mse_mean = 0.0;
  double mse_db = 0.0;
  double mse_stderr = 0.0;
};

std::vector<SummaryRow> aggregate(const std::vector<MseRecord>& records);

double mse_to_db(double mse);

/// 10 log10(worse / better): positive when `better` has the lower MSE.
double gap_db(double worse_mse, double better_mse);

/// Binary snapshot store keyed by (seed, index, scenario hash).
class SnapshotCache {
 public:
  explicit SnapshotCache(std::filesystem::path directory);

  std::optional<Snapshot> load(std::uint64_t seed, std::uint64_t index,
                               const SystemConfig& config) const;
  void store(std::uint64_t seed, std::uint64_t index, const SystemConfig& config,
             const Snapshot& snapshot) const;
  std::filesystem::path path_for(std::uint64_t seed, std::uint64_t index,
                                 const SystemConfig& config) const;

 private:
  std::filesystem::path dir_;
};

/// Hash of the fields that determine a snapshot (geometry and propagation).
std::uint64_t scenario_hash(const SystemConfig& config);

void write_snapshot(std::ostream& out, const Snapshot& snapshot);
/// Throws std::runtime_error on a malformed stream.
Snapshot read_snapshot(std::istream& in);

}  // namespace aircomp
