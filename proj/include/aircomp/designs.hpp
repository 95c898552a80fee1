#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aircomp/pilots.hpp"

namespace aircomp {

// ---------------------------------------------------------------------------
// Level 3: centralized combining over the stacked L N-dimensional signal.
// ---------------------------------------------------------------------------

/// v^H C_k v for the block-diagonal stacked error covariance of device k.
double stacked_error_power(const ComplexVector& v, const EstimationResult& est, int k);

/// Conditional MSE of the centralized estimate v^H y / K:
///   (1/K^2) (sum_k |v^H h_hat_k b_k - 1|^2 + |b_k|^2 v^H C_k v + delta^2 |v|^2).
double mse_level3(std::span<const cd> b, const ComplexVector& v, const EstimationResult& est,
                  double noise_mw);

struct KktPoint {
  cd b;
  double mu = 0.0;
};

/// Minimizes |g b - 1|^2 + e |b|^2 subject to |b|^2 <= P, where g = v^H h_hat_k
/// and e = v^H C_k v. A zero channel (g = 0) or a zero budget yields b = 0
/// with mu = 0.
KktPoint optimal_b(cd effective_gain, double error_power, double max_power_mw);

KktPoint optimal_b(const ComplexVector& v, const EstimationResult& est, int k,
                   double max_power_mw);

/// Unconstrained MSE-optimal stacked combiner for fixed b.
ComplexVector optimal_v(std::span<const cd> b, const EstimationResult& est, double noise_mw);

struct AltOptOptions {
  int max_iter = 100;
  double rel_tol = 1e-8;
  bool tco_enabled = true;
};

struct Level3Design {
  std::vector<cd> b;
  ComplexVector v;
  /// Conditional MSE after every block update: the first entry is the v step
  /// from the full-power start, then alternating b and v steps.
  std::vector<double> mse_trace;
  int iterations = 0;

  double mse() const { return mse_trace.back(); }
};

/// Block-coordinate descent over (v, {b_k}) starting from b_k = sqrt(P_k).
/// Stops once a full iteration lowers the MSE by less than rel_tol
/// (relative) or after max_iter iterations. With TCO disabled, b stays at
/// full power and v is computed once.
Level3Design alternating_optimize(const EstimationResult& est,
                                  std::span<const double> max_power_mw, double noise_mw,
                                  const AltOptOptions& options = {});

// ---------------------------------------------------------------------------
// Levels 2 and 1: local combining at each AP, scalar decoding at the CPU.
// ---------------------------------------------------------------------------

/// Local MMSE combiner of AP l:
///   (sum_k |b_k|^2 (h_hat_kl h_hat_kl^H + C_kl) + delta^2 I)^{-1} sum_k b_k h_hat_kl.
ComplexVector local_combiner(const EstimationResult& est, int l, std::span<const cd> b,
                             double noise_mw);

/// Local conditional MSE of AP l for combiner v_l.
double local_mse(const ComplexVector& v_l, const EstimationResult& est, int l,
                 std::span<const cd> b, double noise_mw);

/// Effective scalar channels seen by the CPU for one realization:
/// g_k[l] = v_l^H h_kl with the true channels, and D_l = |v_l|^2.
struct EffectiveChannels {
  std::vector<ComplexVector> g;  // K vectors of length L
  Eigen::VectorXd D;             // length L
};

EffectiveChannels effective_channels(const EstimationResult& est,
                                     const ChannelRealization& channels, std::span<const cd> b,
                                     double noise_mw);

/// Conditional MSE of the CPU estimate a^H (local estimates):
///   (1/K^2) (sum_k |a^H g_k b_k - 1|^2 + delta^2 a^H D a).
double mse_level2(const ComplexVector& a, std::span<const cd> b, const EffectiveChannels& eff,
                  double noise_mw);

/// Monte Carlo channel statistics used for large-scale fading decoding.
struct LsfdStatistics {
  std::vector<ComplexVector> mean_g;      // E{g_k}
  std::vector<HermitianMatrix> second_g;  // E{g_k g_k^H}
  Eigen::VectorXd mean_D;                 // E{|v_l|^2}
  int sample_count = 0;
};

/// Averages g_k, g_k g_k^H and D over M independent (channel, pilot noise)
/// draws, each with freshly estimated channels and recomputed local
/// combiners.
LsfdStatistics lsfd_statistics(const Snapshot& snapshot, const PilotAssignment& assignment,
                               std::span<const cd> b, const LinkBudget& budget, int M, Rng& rng);

/// a = (sum_k |b_k|^2 E{g_k g_k^H} + delta^2 E{D})^{-1} sum_k b_k E{g_k}.
/// APs with zero statistics (no signal, no noise) get a_l = 0.
ComplexVector lsfd_weights(const LsfdStatistics& stats, std::span<const cd> b, double noise_mw);

/// Statistics-based transmit coefficients for fixed a: the Level-3 KKT
/// solution with E{g_k} in place of g_k and no error term.
std::vector<cd> statistical_b(const LsfdStatistics& stats, const ComplexVector& a,
                              std::span<const double> max_power_mw);

struct Level2Options {
  int lsfd_samples = 500;
  /// Off by default: one pass of statistical_b after the LSFD weights,
  /// without refreshing the statistics for the new b.
  bool refine_b_from_statistics = false;
};

struct Level2Design {
  std::vector<cd> b;
  std::vector<ComplexVector> v_locals;  // combiners for the estimate the design was built on
  ComplexVector a;
  LsfdStatistics stats;
};

Level2Design design_level2(const Snapshot& snapshot, const PilotAssignment& assignment,
                           const EstimationResult& est, std::span<const double> max_power_mw,
                           const LinkBudget& budget, const Level2Options& options, Rng& rng);

struct MseEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Averages mse_level2 over `trials` fresh joint draws with design.a and
/// design.b held fixed.
MseEstimate evaluate_level2(const Snapshot& snapshot, const PilotAssignment& assignment,
                            const Level2Design& design, const LinkBudget& budget, int trials,
                            Rng& rng);

/// Same protocol as evaluate_level2 with a_l = 1/L.
MseEstimate evaluate_level1(const Snapshot& snapshot, const PilotAssignment& assignment,
                            std::span<const cd> b, const LinkBudget& budget, int trials,
                            Rng& rng);

/// Evaluates an arbitrary fixed CPU weight vector under the Level-2 protocol.
MseEstimate evaluate_decoder(const Snapshot& snapshot, const PilotAssignment& assignment,
                             const ComplexVector& a, std::span<const cd> b,
                             const LinkBudget& budget, int trials, Rng& rng);

/// Full-power coefficients b_k = sqrt(P_k).
std::vector<cd> full_power(std::span<const double> max_power_mw);

// ---------------------------------------------------------------------------
// High-power MSE floor and fronthaul accounting.
// ---------------------------------------------------------------------------

/// (1/K^2) (sum_k 1 / (h_hat_k^H C_k^{-1} h_hat_k + 1) + delta^2 |v|^2).
/// Throws SingularMatrixError if any C_kl is singular.
double asymptotic_floor(const EstimationResult& est, const ComplexVector& v, double noise_mw);

/// Count of complex scalars in units of one half (real-valued quantities
/// count as half a complex scalar).
struct HalfCount {
  std::int64_t halves = 0;

  double value() const { return static_cast<double>(halves) / 2.0; }
  bool is_integer() const { return halves % 2 == 0; }
  std::string str() const;
  friend bool operator==(const HalfCount&, const HalfCount&) = default;
};

struct FronthaulCount {
  HalfCount per_block_to_cpu;
  HalfCount per_block_to_aps;
  HalfCount statistical;
  friend bool operator==(const FronthaulCount&, const FronthaulCount&) = default;
};

/// Complex scalars exchanged over the fronthaul at cooperation level 1, 2 or 3.
FronthaulCount fronthaul_count(int level, const SystemConfig& config);

}  // namespace aircomp
