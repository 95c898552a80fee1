#include "aircomp/designs.hpp"

namespace aircomp {

double asymptotic_floor(const EstimationResult& est, const ComplexVector& v, double noise_mw) {
  const int K = est.devices();
  double sum = 0.0;
  for (int k = 0; k < K; ++k) {
    // C_k is block diagonal, so the quotient bound splits over the APs.
    double quotient = 0.0;
    for (int l = 0; l < est.aps(); ++l) quotient += rayleigh_max(est.h_hat(k, l), est.C(k, l));
    sum += 1.0 / (quotient + 1.0);
  }
  sum += noise_mw * v.squaredNorm();
  return sum / (static_cast<double>(K) * K);
}

std::string HalfCount::str() const {
  if (is_integer()) return std::to_string(halves / 2);
  return std::to_string(halves / 2) + ".5";
}

FronthaulCount fronthaul_count(int level, const SystemConfig& config) {
  const std::int64_t L = config.L;
  const std::int64_t N = config.N;
  const std::int64_t K = config.K;
  const std::int64_t tau_c = config.tau_c;
  const std::int64_t tau_p = config.tau_p;
  auto whole = [](std::int64_t n) { return HalfCount{2 * n}; };
  auto half = [](std::int64_t n) { return HalfCount{n}; };

  switch (level) {
    case 3:
      return {whole(tau_c * N * L), whole(K), half(K * L * N * N)};
    case 2:
      return {whole((tau_c - tau_p) * L), whole(0), HalfCount{2 * K * L + L + K * L * L}};
    case 1:
      return {whole((tau_c - tau_p) * L), whole(0), whole(0)};
    default:
      throw ConfigError("level", "cooperation level must be 1, 2 or 3");
  }
}

}  // namespace aircomp
