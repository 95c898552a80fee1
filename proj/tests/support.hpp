#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "aircomp/designs.hpp"

namespace aircomp::test {

/// Running mean / standard error accumulator.
class Moments {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  long count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_error() const { return std::sqrt(variance() / static_cast<double>(n_)); }

 private:
  long n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

inline ComplexVector random_vector(Rng& rng, int n, double var = 1.0) {
  return complex_normal_vector(rng, n, var);
}

/// G G^H / n with G n x (n + extra) Gaussian; full rank for extra >= 0.
inline ComplexMatrix random_psd(Rng& rng, int n, int extra = 2) {
  ComplexMatrix G(n, n + extra);
  for (int j = 0; j < n + extra; ++j) G.col(j) = complex_normal_vector(rng, n, 1.0);
  return G * G.adjoint() / static_cast<double>(n);
}

inline ComplexMatrix random_psd_rank(Rng& rng, int n, int rank) {
  ComplexMatrix G(n, rank);
  for (int j = 0; j < rank; ++j) G.col(j) = complex_normal_vector(rng, n, 1.0);
  return G * G.adjoint();
}

inline SystemConfig small_config(int L = 4, int N = 2, int K = 3, int tau_p = 3) {
  SystemConfig c;
  c.L = L;
  c.N = N;
  c.K = K;
  c.tau_p = tau_p;
  return c;
}

/// Estimate built by hand from per-(k, l) estimates and error covariances;
/// B is set to h_hat h_hat^H, which is all the designs read from it.
inline EstimationResult hand_estimate(const PairArray<ComplexVector>& h_hat,
                                      const PairArray<ComplexMatrix>& C) {
  const int K = h_hat.devices();
  const int L = h_hat.aps();
  auto cov = std::make_shared<EstimationCovariances>();
  cov->B = PairArray<HermitianMatrix>(K, L);
  cov->C = PairArray<HermitianMatrix>(K, L);
  EstimationResult est;
  est.h_hat = h_hat;
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      cov->B(k, l) = HermitianMatrix::symmetrized(h_hat(k, l) * h_hat(k, l).adjoint());
      cov->C(k, l) = HermitianMatrix::symmetrized(C(k, l));
    }
  }
  est.cov = std::move(cov);
  return est;
}

/// Random estimate with independent Gaussian h_hat and random PSD C.
inline EstimationResult random_estimate(Rng& rng, int K, int L, int N, double c_scale = 0.1) {
  PairArray<ComplexVector> h(K, L);
  PairArray<ComplexMatrix> C(K, L);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      h(k, l) = random_vector(rng, N);
      C(k, l) = c_scale * random_psd(rng, N);
    }
  }
  return hand_estimate(h, C);
}

/// Snapshot whose pairs all share one diagonal R = beta I.
inline Snapshot white_snapshot(int K, int L, int N, double beta) {
  Topology topo;
  for (int l = 0; l < L; ++l) topo.ap_positions.push_back({100.0 * l, 0.0});
  for (int k = 0; k < K; ++k) topo.device_positions.push_back({0.0, 10.0 * k});
  Eigen::MatrixXd b = Eigen::MatrixXd::Constant(K, L, beta);
  PairArray<HermitianMatrix> R(K, L, HermitianMatrix::symmetrized(beta * ComplexMatrix::Identity(N, N)));
  return make_snapshot(topo, b, Eigen::MatrixXd::Zero(K, L), std::move(R));
}

/// Snapshot with per-AP gains `beta_per_ap` shared by every device, R = beta I.
inline Snapshot ap_gain_snapshot(int K, const std::vector<double>& beta_per_ap, int N) {
  const int L = static_cast<int>(beta_per_ap.size());
  Topology topo;
  for (int l = 0; l < L; ++l) topo.ap_positions.push_back({100.0 * l, 0.0});
  for (int k = 0; k < K; ++k) topo.device_positions.push_back({0.0, 10.0 * k});
  Eigen::MatrixXd b(K, L);
  PairArray<HermitianMatrix> R(K, L);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      b(k, l) = beta_per_ap[l];
      R(k, l) = HermitianMatrix::symmetrized(beta_per_ap[l] * ComplexMatrix::Identity(N, N));
    }
  }
  return make_snapshot(topo, b, Eigen::MatrixXd::Zero(K, L), std::move(R));
}

}  // namespace aircomp::test
