#pragma once

#include <memory>
#include <vector>

#include "aircomp/network.hpp"

namespace aircomp {

struct PilotAssignment {
  int tau_p = 0;
  std::vector<int> pilot_of;            // device -> pilot index in [0, tau_p)
  std::vector<std::vector<int>> coset;  // device -> devices sharing its pilot, itself included

  int devices() const { return static_cast<int>(pilot_of.size()); }
};

/// Builds the cosets for a given device-to-pilot map.
PilotAssignment make_assignment(int tau_p, std::vector<int> pilot_of);

/// Each device draws its pilot uniformly and independently. With
/// `orthogonal` set (requires tau_p >= K) the pilots are a random injection
/// instead, so no two devices collide.
PilotAssignment assign_pilots(int K, int tau_p, Rng& rng, bool orthogonal = false);

/// Linear-scale powers that enter channel estimation and data reception.
struct LinkBudget {
  std::vector<double> pilot_power_mw;  // p_k
  double noise_mw = 0.0;               // delta^2, shared by pilot and data phases
  int tau_p = 1;

  static LinkBudget from(const SystemConfig& config);
};

/// Despread pilot observations y_kl = sum_{i in P_k} sqrt(p_i tau_p) h_il + n_kl.
/// Devices sharing a pilot receive the identical vector (one noise draw per
/// pilot and AP).
PairArray<ComplexVector> pilot_observation(const ChannelRealization& channels,
                                           const PilotAssignment& assignment,
                                           const LinkBudget& budget, Rng& rng);

struct EstimationCovariances {
  PairArray<HermitianMatrix> B;  // E{h_hat h_hat^H}
  PairArray<HermitianMatrix> C;  // R - B, error covariance
};

struct EstimationResult {
  PairArray<ComplexVector> h_hat;
  std::shared_ptr<const EstimationCovariances> cov;

  int devices() const { return h_hat.devices(); }
  int aps() const { return h_hat.aps(); }
  int antennas() const { return static_cast<int>(h_hat(0, 0).size()); }
  const HermitianMatrix& B(int k, int l) const { return cov->B(k, l); }
  const HermitianMatrix& C(int k, int l) const { return cov->C(k, l); }

  /// [h_hat_k1; ...; h_hat_kL], length L N.
  ComplexVector stacked(int k) const;
};

/// Per-pair MMSE filters sqrt(p_k tau_p) R_kl Xi_kl^{-1} together with B and
/// C. These depend only on the statistics, so one estimator serves any number
/// of pilot realizations.
class MmseEstimator {
 public:
  /// Throws SingularMatrixError if some Xi_kl is not positive definite.
  MmseEstimator(const Snapshot& snapshot, const PilotAssignment& assignment,
                const LinkBudget& budget);

  EstimationResult estimate(const PairArray<ComplexVector>& y_pilot) const;

  const std::shared_ptr<const EstimationCovariances>& covariances() const { return cov_; }

 private:
  PairArray<ComplexMatrix> filter_;
  std::shared_ptr<const EstimationCovariances> cov_;
};

EstimationResult mmse_estimate(const PairArray<ComplexVector>& y_pilot, const Snapshot& snapshot,
                               const PilotAssignment& assignment, const LinkBudget& budget);

/// Genie estimate: h_hat = h, B = R, C = 0.
EstimationResult perfect_csi(const ChannelRealization& channels, const Snapshot& snapshot);

}  // namespace aircomp
