#include <cmath>

#include "aircomp/designs.hpp"

namespace aircomp {

namespace {

/// Local combiners for fixed b. The error-covariance part of each AP's
/// system matrix does not depend on the pilot realization, so it is summed
/// once and reused for every draw.
class LocalCombinerBank {
 public:
  LocalCombinerBank(const EstimationCovariances& cov, std::span<const cd> b, double noise_mw)
      : b_(b.begin(), b.end()) {
    const int K = cov.C.devices();
    const int L = cov.C.aps();
    const auto N = cov.C(0, 0).dim();
    base_.reserve(L);
    for (int l = 0; l < L; ++l) {
      ComplexMatrix A = noise_mw * ComplexMatrix::Identity(N, N);
      for (int k = 0; k < K; ++k) A += std::norm(b_[k]) * cov.C(k, l).matrix();
      base_.push_back(std::move(A));
    }
  }

  ComplexVector combiner(const EstimationResult& est, int l) const {
    ComplexMatrix A = base_[l];
    ComplexVector rhs = ComplexVector::Zero(A.rows());
    for (int k = 0; k < est.devices(); ++k) {
      const ComplexVector& h = est.h_hat(k, l);
      A.noalias() += std::norm(b_[k]) * h * h.adjoint();
      rhs += b_[k] * h;
    }
    if (rhs.squaredNorm() == 0.0) return ComplexVector::Zero(A.rows());
    return hermitian_solve(HermitianMatrix::symmetrized(A), rhs);
  }

  EffectiveChannels effective(const EstimationResult& est,
                              const ChannelRealization& channels) const {
    const int K = est.devices();
    const int L = est.aps();
    EffectiveChannels eff;
    eff.g.assign(K, ComplexVector::Zero(L));
    eff.D = Eigen::VectorXd::Zero(L);
    for (int l = 0; l < L; ++l) {
      const ComplexVector v = combiner(est, l);
      eff.D(l) = v.squaredNorm();
      for (int k = 0; k < K; ++k) eff.g[k](l) = v.dot(channels.h(k, l));
    }
    return eff;
  }

 private:
  std::vector<cd> b_;
  std::vector<ComplexMatrix> base_;
};

/// One joint draw of channels and pilot noise, pushed through estimation and
/// local combining.
class JointSampler {
 public:
  JointSampler(const Snapshot& snapshot, const PilotAssignment& assignment,
               const LinkBudget& budget, std::span<const cd> b)
      : snapshot_(snapshot),
        assignment_(assignment),
        budget_(budget),
        estimator_(snapshot, assignment, budget),
        bank_(*estimator_.covariances(), b, budget.noise_mw) {}

  EffectiveChannels draw(Rng& rng) const {
    const ChannelRealization channels = sample_channels(snapshot_, rng);
    const auto y = pilot_observation(channels, assignment_, budget_, rng);
    return bank_.effective(estimator_.estimate(y), channels);
  }

 private:
  const Snapshot& snapshot_;
  const PilotAssignment& assignment_;
  const LinkBudget& budget_;
  MmseEstimator estimator_;
  LocalCombinerBank bank_;
};

}  // namespace

ComplexVector local_combiner(const EstimationResult& est, int l, std::span<const cd> b,
                             double noise_mw) {
  if (static_cast<int>(b.size()) != est.devices()) {
    throw DimensionMismatchError("local_combiner: expected one coefficient per device");
  }
  return LocalCombinerBank(*est.cov, b, noise_mw).combiner(est, l);
}

double local_mse(const ComplexVector& v_l, const EstimationResult& est, int l,
                 std::span<const cd> b, double noise_mw) {
  const int K = est.devices();
  double sum = 0.0;
  for (int k = 0; k < K; ++k) {
    sum += std::norm(v_l.dot(est.h_hat(k, l)) * b[k] - 1.0) +
           std::norm(b[k]) * quad_form(v_l, est.C(k, l));
  }
  sum += noise_mw * v_l.squaredNorm();
  return sum / (static_cast<double>(K) * K);
}

EffectiveChannels effective_channels(const EstimationResult& est,
                                     const ChannelRealization& channels, std::span<const cd> b,
                                     double noise_mw) {
  return LocalCombinerBank(*est.cov, b, noise_mw).effective(est, channels);
}

double mse_level2(const ComplexVector& a, std::span<const cd> b, const EffectiveChannels& eff,
                  double noise_mw) {
  const int K = static_cast<int>(eff.g.size());
  if (static_cast<int>(b.size()) != K || a.size() != eff.D.size()) {
    throw DimensionMismatchError("mse_level2: dimension mismatch");
  }
  double sum = 0.0;
  for (int k = 0; k < K; ++k) sum += std::norm(a.dot(eff.g[k]) * b[k] - 1.0);
  sum += noise_mw * (a.cwiseAbs2().array() * eff.D.array()).sum();
  return sum / (static_cast<double>(K) * K);
}

LsfdStatistics lsfd_statistics(const Snapshot& snapshot, const PilotAssignment& assignment,
                               std::span<const cd> b, const LinkBudget& budget, int M, Rng& rng) {
  if (M < 1) throw ConfigError("lsfd_samples", "must be >= 1");
  const int K = snapshot.devices();
  const int L = snapshot.aps();
  const JointSampler sampler(snapshot, assignment, budget, b);

  std::vector<ComplexVector> sum_g(K, ComplexVector::Zero(L));
  std::vector<ComplexMatrix> sum_gg(K, ComplexMatrix::Zero(L, L));
  Eigen::VectorXd sum_D = Eigen::VectorXd::Zero(L);
  for (int m = 0; m < M; ++m) {
    const EffectiveChannels eff = sampler.draw(rng);
    for (int k = 0; k < K; ++k) {
      sum_g[k] += eff.g[k];
      sum_gg[k].noalias() += eff.g[k] * eff.g[k].adjoint();
    }
    sum_D += eff.D;
  }

  LsfdStatistics stats;
  stats.sample_count = M;
  stats.mean_D = sum_D / M;
  for (int k = 0; k < K; ++k) {
    stats.mean_g.push_back(sum_g[k] / M);
    stats.second_g.push_back(HermitianMatrix::symmetrized(sum_gg[k] / M));
  }
  return stats;
}

ComplexVector lsfd_weights(const LsfdStatistics& stats, std::span<const cd> b, double noise_mw) {
  const int K = static_cast<int>(stats.mean_g.size());
  if (static_cast<int>(b.size()) != K) {
    throw DimensionMismatchError("lsfd_weights: expected one coefficient per device");
  }
  const auto L = stats.mean_D.size();
  ComplexMatrix A = ComplexMatrix::Zero(L, L);
  ComplexVector rhs = ComplexVector::Zero(L);
  for (int k = 0; k < K; ++k) {
    A += std::norm(b[k]) * stats.second_g[k].matrix();
    rhs += b[k] * stats.mean_g[k];
  }
  A.diagonal() += (noise_mw * stats.mean_D).cast<cd>();
  if (rhs.squaredNorm() == 0.0) return ComplexVector::Zero(L);

  // An AP that never delivers signal or noise has an all-zero row; it gets
  // weight zero and drops out of the system.
  std::vector<Eigen::Index> active;
  for (Eigen::Index l = 0; l < L; ++l) {
    if (A(l, l).real() > 0.0) active.push_back(l);
  }
  const auto n = static_cast<Eigen::Index>(active.size());
  ComplexMatrix A_active(n, n);
  ComplexVector rhs_active(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    rhs_active(i) = rhs(active[i]);
    for (Eigen::Index j = 0; j < n; ++j) A_active(i, j) = A(active[i], active[j]);
  }
  const ComplexVector solved = hermitian_solve(HermitianMatrix::symmetrized(A_active), rhs_active);
  ComplexVector a = ComplexVector::Zero(L);
  for (Eigen::Index i = 0; i < n; ++i) a(active[i]) = solved(i);
  return a;
}

std::vector<cd> statistical_b(const LsfdStatistics& stats, const ComplexVector& a,
                              std::span<const double> max_power_mw) {
  std::vector<cd> b(stats.mean_g.size());
  for (std::size_t k = 0; k < b.size(); ++k) {
    b[k] = optimal_b(a.dot(stats.mean_g[k]), 0.0, max_power_mw[k]).b;
  }
  return b;
}

Level2Design design_level2(const Snapshot& snapshot, const PilotAssignment& assignment,
                           const EstimationResult& est, std::span<const double> max_power_mw,
                           const LinkBudget& budget, const Level2Options& options, Rng& rng) {
  Level2Design design;
  design.b = full_power(max_power_mw);
  design.stats =
      lsfd_statistics(snapshot, assignment, design.b, budget, options.lsfd_samples, rng);
  design.a = lsfd_weights(design.stats, design.b, budget.noise_mw);
  if (options.refine_b_from_statistics) {
    design.b = statistical_b(design.stats, design.a, max_power_mw);
  }
  const LocalCombinerBank bank(*est.cov, design.b, budget.noise_mw);
  for (int l = 0; l < est.aps(); ++l) design.v_locals.push_back(bank.combiner(est, l));
  return design;
}

MseEstimate evaluate_decoder(const Snapshot& snapshot, const PilotAssignment& assignment,
                             const ComplexVector& a, std::span<const cd> b,
                             const LinkBudget& budget, int trials, Rng& rng) {
  if (trials < 1) throw ConfigError("trials_per_snapshot", "must be >= 1");
  const JointSampler sampler(snapshot, assignment, budget, b);
  // Welford running moments.
  double mean = 0.0;
  double m2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    const double mse = mse_level2(a, b, sampler.draw(rng), budget.noise_mw);
    const double delta = mse - mean;
    mean += delta / (t + 1);
    m2 += delta * (mse - mean);
  }
  MseEstimate out;
  out.mean = mean;
  if (trials > 1) out.std_error = std::sqrt(m2 / (trials - 1) / trials);
  return out;
}

MseEstimate evaluate_level2(const Snapshot& snapshot, const PilotAssignment& assignment,
                            const Level2Design& design, const LinkBudget& budget, int trials,
                            Rng& rng) {
  return evaluate_decoder(snapshot, assignment, design.a, design.b, budget, trials, rng);
}

MseEstimate evaluate_level1(const Snapshot& snapshot, const PilotAssignment& assignment,
                            std::span<const cd> b, const LinkBudget& budget, int trials,
                            Rng& rng) {
  const int L = snapshot.aps();
  const ComplexVector a = ComplexVector::Constant(L, cd(1.0 / L, 0.0));
  return evaluate_decoder(snapshot, assignment, a, b, budget, trials, rng);
}

}  // namespace aircomp
