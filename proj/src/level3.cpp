#include <cmath>

#include "aircomp/designs.hpp"

namespace aircomp {

namespace {

void require_devices(std::span<const cd> b, const EstimationResult& est) {
  if (static_cast<int>(b.size()) != est.devices()) {
    throw DimensionMismatchError("expected one transmit coefficient per device");
  }
}

}  // namespace

std::vector<cd> full_power(std::span<const double> max_power_mw) {
  std::vector<cd> b;
  b.reserve(max_power_mw.size());
  for (double p : max_power_mw) b.emplace_back(std::sqrt(std::max(p, 0.0)), 0.0);
  return b;
}

double stacked_error_power(const ComplexVector& v, const EstimationResult& est, int k) {
  const int N = est.antennas();
  double total = 0.0;
  for (int l = 0; l < est.aps(); ++l) {
    total += quad_form(v.segment(static_cast<Eigen::Index>(l) * N, N), est.C(k, l));
  }
  return total;
}

double mse_level3(std::span<const cd> b, const ComplexVector& v, const EstimationResult& est,
                  double noise_mw) {
  require_devices(b, est);
  const Eigen::Index LN = static_cast<Eigen::Index>(est.aps()) * est.antennas();
  if (v.size() != LN) {
    throw DimensionMismatchError("mse_level3: combiner has " + std::to_string(v.size()) +
                                 " entries, expected " + std::to_string(LN));
  }
  const int K = est.devices();
  double sum = 0.0;
  for (int k = 0; k < K; ++k) {
    const cd gain = v.dot(est.stacked(k));  // v^H h_hat_k
    sum += std::norm(gain * b[k] - 1.0) + std::norm(b[k]) * stacked_error_power(v, est, k);
  }
  sum += noise_mw * v.squaredNorm();
  return sum / (static_cast<double>(K) * K);
}

KktPoint optimal_b(cd effective_gain, double error_power, double max_power_mw) {
  const double abs_gain = std::abs(effective_gain);
  if (abs_gain == 0.0 || !(max_power_mw > 0.0)) return {cd{0.0, 0.0}, 0.0};
  const double mu =
      std::max(0.0, abs_gain / std::sqrt(max_power_mw) - abs_gain * abs_gain - error_power);
  const cd b = std::conj(effective_gain) / (abs_gain * abs_gain + error_power + mu);
  return {b, mu};
}

KktPoint optimal_b(const ComplexVector& v, const EstimationResult& est, int k,
                   double max_power_mw) {
  return optimal_b(v.dot(est.stacked(k)), stacked_error_power(v, est, k), max_power_mw);
}

ComplexVector optimal_v(std::span<const cd> b, const EstimationResult& est, double noise_mw) {
  require_devices(b, est);
  const int K = est.devices();
  const int L = est.aps();
  const int N = est.antennas();
  const Eigen::Index LN = static_cast<Eigen::Index>(L) * N;

  ComplexMatrix scaled(LN, K);  // columns |b_k| h_hat_k
  ComplexVector rhs = ComplexVector::Zero(LN);
  for (int k = 0; k < K; ++k) {
    const ComplexVector h = est.stacked(k);
    scaled.col(k) = std::abs(b[k]) * h;
    rhs += b[k] * h;
  }
  ComplexMatrix A = scaled * scaled.adjoint();
  A.diagonal().array() += noise_mw;
  for (int l = 0; l < L; ++l) {
    auto block = A.block(static_cast<Eigen::Index>(l) * N, static_cast<Eigen::Index>(l) * N, N, N);
    for (int k = 0; k < K; ++k) block += std::norm(b[k]) * est.C(k, l).matrix();
  }
  if (rhs.squaredNorm() == 0.0) return ComplexVector::Zero(LN);
  return hermitian_solve(HermitianMatrix::symmetrized(A), rhs);
}

Level3Design alternating_optimize(const EstimationResult& est,
                                  std::span<const double> max_power_mw, double noise_mw,
                                  const AltOptOptions& options) {
  const int K = est.devices();
  if (static_cast<int>(max_power_mw.size()) != K) {
    throw DimensionMismatchError("alternating_optimize: expected one power budget per device");
  }
  Level3Design design;
  design.b = full_power(max_power_mw);
  double previous = 0.0;
  for (int iter = 1;; ++iter) {
    design.v = optimal_v(design.b, est, noise_mw);
    design.mse_trace.push_back(mse_level3(design.b, design.v, est, noise_mw));
    design.iterations = iter;
    if (!options.tco_enabled) break;
    if (iter == 1) previous = design.mse_trace.back();

    for (int k = 0; k < K; ++k) design.b[k] = optimal_b(design.v, est, k, max_power_mw[k]).b;
    design.mse_trace.push_back(mse_level3(design.b, design.v, est, noise_mw));

    const double current = design.mse_trace.back();
    if (iter >= options.max_iter || previous - current <= options.rel_tol * previous) break;
    previous = current;
  }
  return design;
}

}  // namespace aircomp
