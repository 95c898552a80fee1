#include "aircomp/network.hpp"

#include <cmath>
#include <numbers>

namespace aircomp {

void SystemConfig::validate() const {
  if (L < 1) throw ConfigError("system.L", "must be >= 1");
  if (N < 1) throw ConfigError("system.N", "must be >= 1");
  if (K < 1) throw ConfigError("system.K", "must be >= 1");
  if (tau_p < 1) throw ConfigError("system.tau_p", "must be >= 1");
  if (tau_c < 1) throw ConfigError("system.tau_c", "must be >= 1");
  if (tau_p > tau_c) throw ConfigError("system.tau_p", "must not exceed tau_c");
  if (!(area_m > 0.0) || !std::isfinite(area_m)) throw ConfigError("system.area_m", "must be > 0");
  if (!(ref_dist_m > 0.0)) throw ConfigError("system.ref_dist_m", "must be > 0");
  if (!(shadow_std_db >= 0.0)) throw ConfigError("system.shadow_std_db", "must be >= 0");
  if (!(shadow_decorr_m > 0.0)) throw ConfigError("system.shadow_decorr_m", "must be > 0");
  if (!(asd_deg >= 0.0)) throw ConfigError("system.asd_deg", "must be >= 0");
  for (const auto& [key, value] : {std::pair{"system.pilot_power_dbm", pilot_power_dbm},
                                   std::pair{"system.noise_power_dbm", noise_power_dbm},
                                   std::pair{"system.pathloss_beta0_db", pathloss_beta0_db},
                                   std::pair{"system.pathloss_alpha", pathloss_alpha}}) {
    if (!std::isfinite(value)) throw ConfigError(key, "must be finite");
  }
  if (!pilot_power_dbm_per_device.empty()) {
    if (static_cast<int>(pilot_power_dbm_per_device.size()) != K) {
      throw ConfigError("system.pilot_power_dbm_per_device", "needs exactly K entries");
    }
    for (double p : pilot_power_dbm_per_device) {
      if (!std::isfinite(p)) throw ConfigError("system.pilot_power_dbm_per_device", "must be finite");
    }
  }
  if (placement == Placement::kGrid) {
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(L))));
    if (side * side != L) {
      throw NotPerfectSquareError("system.L", "grid placement needs a perfect square, got " +
                                                  std::to_string(L));
    }
  } else if (L != 1) {
    throw ConfigError("system.L", "center placement supports a single AP");
  }
}

double SystemConfig::pilot_power_mw(int k) const {
  return dbm_to_mw(pilot_power_dbm_per_device.empty() ? pilot_power_dbm
                                                      : pilot_power_dbm_per_device.at(k));
}

std::vector<Point> ap_positions(const SystemConfig& config) {
  const double area = config.area_m;
  if (config.placement == Placement::kCenter) return {{area / 2.0, area / 2.0}};
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(config.L))));
  if (side * side != config.L) {
    throw NotPerfectSquareError("system.L", "grid placement needs a perfect square, got " +
                                                std::to_string(config.L));
  }
  const double spacing = area / side;
  std::vector<Point> aps;
  aps.reserve(config.L);
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) aps.push_back({(i + 0.5) * spacing, (j + 0.5) * spacing});
  }
  return aps;
}

Topology generate_topology(const SystemConfig& config, Rng& rng) {
  const double area = config.area_m;
  Topology topo;
  topo.ap_positions = ap_positions(config);
  std::uniform_real_distribution<double> uniform(0.0, area);
  topo.device_positions.reserve(config.K);
  for (int k = 0; k < config.K; ++k) {
    const double x = uniform(rng);
    const double y = uniform(rng);
    topo.device_positions.push_back({x, y});
  }
  return topo;
}

Point wrap_offset(Point p, Point q, double area_m) {
  Point best{q.x - p.x, q.y - p.y};
  double best_sq = best.x * best.x + best.y * best.y;
  for (int sx = -1; sx <= 1; ++sx) {
    for (int sy = -1; sy <= 1; ++sy) {
      const double dx = q.x + sx * area_m - p.x;
      const double dy = q.y + sy * area_m - p.y;
      const double sq = dx * dx + dy * dy;
      if (sq < best_sq) {
        best_sq = sq;
        best = {dx, dy};
      }
    }
  }
  return best;
}

double wrap_distance(Point p, Point q, double area_m) {
  const Point d = wrap_offset(p, q, area_m);
  return std::hypot(d.x, d.y);
}

Eigen::MatrixXd shadowing_covariance(const Topology& topology, const SystemConfig& config) {
  const auto K = static_cast<Eigen::Index>(topology.device_positions.size());
  const double variance = config.shadow_std_db * config.shadow_std_db;
  Eigen::MatrixXd cov(K, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    cov(k, k) = variance;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double x = wrap_distance(topology.device_positions[k], topology.device_positions[i],
                                     config.area_m);
      cov(k, i) = cov(i, k) = variance * std::pow(2.0, -x / config.shadow_decorr_m);
    }
  }
  return cov;
}

Eigen::MatrixXd sample_shadowing(const Topology& topology, const SystemConfig& config, Rng& rng) {
  const auto K = static_cast<Eigen::Index>(topology.device_positions.size());
  const auto L = static_cast<Eigen::Index>(topology.ap_positions.size());
  const Eigen::MatrixXd factor = psd_factor(shadowing_covariance(topology, config));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd shadow(K, L);
  Eigen::VectorXd w(K);
  for (Eigen::Index l = 0; l < L; ++l) {
    for (Eigen::Index k = 0; k < K; ++k) w(k) = normal(rng);
    shadow.col(l) = factor * w;
  }
  return shadow;
}

double large_scale_gain(double distance_m, double shadow_db, const SystemConfig& config) {
  const double d = std::max(distance_m, config.ref_dist_m);
  const double gain_db = config.pathloss_beta0_db -
                         10.0 * config.pathloss_alpha * std::log10(d / config.ref_dist_m) +
                         shadow_db;
  return db_to_linear(gain_db);
}

HermitianMatrix local_scattering_R(double beta, double nominal_angle_rad, int antennas,
                                   double asd_deg) {
  using std::numbers::pi;
  const double sigma = asd_deg * pi / 180.0;
  const double s = std::sin(nominal_angle_rad);
  const double c = std::cos(nominal_angle_rad);
  ComplexMatrix R(antennas, antennas);
  for (int m = 0; m < antennas; ++m) {
    for (int n = 0; n < antennas; ++n) {
      const double dist = m - n;
      const double damping = std::exp(-0.5 * sigma * sigma * std::pow(pi * dist * c, 2));
      R(m, n) = beta * damping * std::polar(1.0, pi * dist * s);
    }
  }
  return HermitianMatrix::symmetrized(R);
}

Snapshot make_snapshot(Topology topology, Eigen::MatrixXd beta, Eigen::MatrixXd shadow_db,
                       PairArray<HermitianMatrix> R) {
  const int K = static_cast<int>(beta.rows());
  const int L = static_cast<int>(beta.cols());
  if (R.devices() != K || R.aps() != L) {
    throw DimensionMismatchError("snapshot: correlation array does not match gain matrix");
  }
  Snapshot snap;
  snap.R_factor = PairArray<ComplexMatrix>(K, L);
  const Eigen::Index N = K > 0 && L > 0 ? R(0, 0).dim() : 0;
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      const HermitianMatrix& r = R(k, l);
      if (r.dim() != N) throw DimensionMismatchError("snapshot: inconsistent antenna count");
      const double gain = r.trace() / static_cast<double>(N);
      if (std::abs(gain - beta(k, l)) > 1e-9 * std::abs(beta(k, l))) {
        throw NumericsError("snapshot: trace(R)/N does not match beta for pair (" +
                            std::to_string(k) + ", " + std::to_string(l) + ")");
      }
      snap.R_factor(k, l) = psd_factor(r);
    }
  }
  snap.topology = std::move(topology);
  snap.beta = std::move(beta);
  snap.shadow_db = std::move(shadow_db);
  snap.R = std::move(R);
  return snap;
}

Snapshot build_snapshot(const SystemConfig& config, const std::vector<Point>& devices,
                        Rng& shadow_rng) {
  config.validate();
  if (static_cast<int>(devices.size()) != config.K) {
    throw ConfigError("system.K", "device list does not have K entries");
  }
  Topology topo{ap_positions(config), devices};

  const int K = config.K;
  const int L = static_cast<int>(topo.ap_positions.size());
  Eigen::MatrixXd shadow = sample_shadowing(topo, config, shadow_rng);
  Eigen::MatrixXd beta(K, L);
  PairArray<HermitianMatrix> R(K, L);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      const Point d = wrap_offset(topo.ap_positions[l], topo.device_positions[k], config.area_m);
      beta(k, l) = large_scale_gain(std::hypot(d.x, d.y), shadow(k, l), config);
      R(k, l) = local_scattering_R(beta(k, l), std::atan2(d.y, d.x), config.N, config.asd_deg);
    }
  }
  return make_snapshot(std::move(topo), std::move(beta), std::move(shadow), std::move(R));
}

Snapshot build_snapshot(const SystemConfig& config, Rng& rng) {
  config.validate();
  const Topology topo = generate_topology(config, rng);
  return build_snapshot(config, topo.device_positions, rng);
}

ChannelRealization sample_channels(const Snapshot& snapshot, Rng& rng) {
  const int K = snapshot.devices();
  const int L = snapshot.aps();
  ChannelRealization out{PairArray<ComplexVector>(K, L)};
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      const ComplexMatrix& F = snapshot.R_factor(k, l);
      out.h(k, l) = F * complex_normal_vector(rng, F.cols());
    }
  }
  return out;
}

}  // namespace aircomp
