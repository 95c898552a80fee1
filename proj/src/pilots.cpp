#include "aircomp/pilots.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

namespace aircomp {

PilotAssignment make_assignment(int tau_p, std::vector<int> pilot_of) {
  PilotAssignment out;
  out.tau_p = tau_p;
  const int K = static_cast<int>(pilot_of.size());
  std::vector<std::vector<int>> users(tau_p);
  for (int k = 0; k < K; ++k) {
    if (pilot_of[k] < 0 || pilot_of[k] >= tau_p) {
      throw ConfigError("pilots", "pilot index out of range");
    }
    users[pilot_of[k]].push_back(k);
  }
  out.coset.resize(K);
  for (int k = 0; k < K; ++k) out.coset[k] = users[pilot_of[k]];
  out.pilot_of = std::move(pilot_of);
  return out;
}

PilotAssignment assign_pilots(int K, int tau_p, Rng& rng, bool orthogonal) {
  if (tau_p < 1) throw ConfigError("system.tau_p", "must be >= 1");
  std::vector<int> pilot_of(K);
  if (orthogonal) {
    if (tau_p < K) throw ConfigError("pilots.orthogonal", "needs tau_p >= K");
    std::vector<int> pool(tau_p);
    std::iota(pool.begin(), pool.end(), 0);
    std::shuffle(pool.begin(), pool.end(), rng);
    std::copy_n(pool.begin(), K, pilot_of.begin());
  } else {
    std::uniform_int_distribution<int> pick(0, tau_p - 1);
    for (int& p : pilot_of) p = pick(rng);
  }
  return make_assignment(tau_p, std::move(pilot_of));
}

LinkBudget LinkBudget::from(const SystemConfig& config) {
  LinkBudget budget;
  budget.pilot_power_mw.resize(config.K);
  for (int k = 0; k < config.K; ++k) budget.pilot_power_mw[k] = config.pilot_power_mw(k);
  budget.noise_mw = config.noise_mw();
  budget.tau_p = config.tau_p;
  return budget;
}

PairArray<ComplexVector> pilot_observation(const ChannelRealization& channels,
                                           const PilotAssignment& assignment,
                                           const LinkBudget& budget, Rng& rng) {
  const int K = channels.h.devices();
  const int L = channels.h.aps();
  const auto N = channels.h(0, 0).size();
  PairArray<ComplexVector> per_pilot(assignment.tau_p, L, ComplexVector::Zero(N));
  for (int l = 0; l < L; ++l) {
    for (int t = 0; t < assignment.tau_p; ++t) {
      per_pilot(t, l) = complex_normal_vector(rng, N, budget.noise_mw);
    }
    for (int i = 0; i < K; ++i) {
      per_pilot(assignment.pilot_of[i], l) +=
          std::sqrt(budget.pilot_power_mw[i] * budget.tau_p) * channels.h(i, l);
    }
  }
  PairArray<ComplexVector> y(K, L);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) y(k, l) = per_pilot(assignment.pilot_of[k], l);
  }
  return y;
}

ComplexVector EstimationResult::stacked(int k) const {
  const int L = aps();
  const int N = antennas();
  ComplexVector out(static_cast<Eigen::Index>(L) * N);
  for (int l = 0; l < L; ++l) out.segment(static_cast<Eigen::Index>(l) * N, N) = h_hat(k, l);
  return out;
}

MmseEstimator::MmseEstimator(const Snapshot& snapshot, const PilotAssignment& assignment,
                             const LinkBudget& budget) {
  const int K = snapshot.devices();
  const int L = snapshot.aps();
  const int N = snapshot.antennas();
  filter_ = PairArray<ComplexMatrix>(K, L);
  auto cov = std::make_shared<EstimationCovariances>();
  cov->B = PairArray<HermitianMatrix>(K, L);
  cov->C = PairArray<HermitianMatrix>(K, L);
  const double tau = budget.tau_p;

  for (int l = 0; l < L; ++l) {
    // Xi depends only on the pilot, so factor it once per (pilot, AP).
    std::vector<std::optional<Eigen::LLT<ComplexMatrix>>> xi_factor(assignment.tau_p);
    for (int k = 0; k < K; ++k) {
      const int t = assignment.pilot_of[k];
      if (!xi_factor[t]) {
        ComplexMatrix xi = budget.noise_mw * ComplexMatrix::Identity(N, N);
        for (int i : assignment.coset[k]) {
          xi += budget.pilot_power_mw[i] * tau * snapshot.R(i, l).matrix();
        }
        xi_factor[t].emplace(checked_llt(xi, "pilot covariance", 1e-14));
      }
      const auto& llt = *xi_factor[t];
      const ComplexMatrix& R = snapshot.R(k, l).matrix();
      const double ptau = budget.pilot_power_mw[k] * tau;
      const ComplexMatrix W = llt.matrixL().solve(R);         // L^{-1} R
      const ComplexMatrix X = llt.matrixL().adjoint().solve(W);  // Xi^{-1} R
      filter_(k, l) = std::sqrt(ptau) * X.adjoint();              // R Xi^{-1}
      cov->B(k, l) = HermitianMatrix::symmetrized(ptau * (W.adjoint() * W));
      cov->C(k, l) = HermitianMatrix::symmetrized(R - cov->B(k, l).matrix());
    }
  }
  cov_ = std::move(cov);
}

EstimationResult MmseEstimator::estimate(const PairArray<ComplexVector>& y_pilot) const {
  EstimationResult out;
  out.h_hat = PairArray<ComplexVector>(filter_.devices(), filter_.aps());
  for (int k = 0; k < filter_.devices(); ++k) {
    for (int l = 0; l < filter_.aps(); ++l) out.h_hat(k, l) = filter_(k, l) * y_pilot(k, l);
  }
  out.cov = cov_;
  return out;
}

EstimationResult mmse_estimate(const PairArray<ComplexVector>& y_pilot, const Snapshot& snapshot,
                               const PilotAssignment& assignment, const LinkBudget& budget) {
  return MmseEstimator(snapshot, assignment, budget).estimate(y_pilot);
}

EstimationResult perfect_csi(const ChannelRealization& channels, const Snapshot& snapshot) {
  const int K = snapshot.devices();
  const int L = snapshot.aps();
  const int N = snapshot.antennas();
  auto cov = std::make_shared<EstimationCovariances>();
  cov->B = snapshot.R;
  cov->C = PairArray<HermitianMatrix>(K, L, HermitianMatrix::zero(N));
  EstimationResult out;
  out.h_hat = channels.h;
  out.cov = std::move(cov);
  return out;
}

}  // namespace aircomp
