#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "aircomp/numerics.hpp"
#include "aircomp/random.hpp"

namespace aircomp {

/// Invalid scenario or experiment parameters. `key()` names the offending
/// field as a dotted path when one is known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& reason)
      : std::runtime_error(key.empty() ? reason : key + ": " + reason), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class NotPerfectSquareError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

enum class Placement {
  kGrid,    // sqrt(L) x sqrt(L) AP grid
  kCenter,  // a single base station at the area center
};

struct SystemConfig {
  int L = 144;
  int N = 1;
  int K = 20;
  int tau_p = 20;
  int tau_c = 200;
  double pilot_power_dbm = 20.0;
  std::vector<double> pilot_power_dbm_per_device;  // overrides pilot_power_dbm when non-empty
  double noise_power_dbm = -96.0;
  double area_m = 1000.0;
  double pathloss_beta0_db = -30.5;
  double pathloss_alpha = 3.67;
  double ref_dist_m = 1.0;
  double shadow_std_db = 4.0;
  double shadow_decorr_m = 9.0;
  double asd_deg = 15.0;
  Placement placement = Placement::kGrid;
  /// Throws ConfigError on the first violated constraint.
  void validate() const;

  double pilot_power_mw(int k) const;
  double noise_mw() const { return dbm_to_mw(noise_power_dbm); }
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Topology {
  std::vector<Point> ap_positions;
  std::vector<Point> device_positions;
};

/// K x L array indexed by (device, AP).
template <typename T>
class PairArray {
 public:
  PairArray() = default;
  PairArray(int devices, int aps, const T& init = T{})
      : K_(devices), L_(aps), data_(static_cast<std::size_t>(devices) * aps, init) {}

  int devices() const { return K_; }
  int aps() const { return L_; }
  T& operator()(int k, int l) { return data_[index(k, l)]; }
  const T& operator()(int k, int l) const { return data_[index(k, l)]; }

 private:
  std::size_t index(int k, int l) const { return static_cast<std::size_t>(k) * L_ + l; }

  int K_ = 0;
  int L_ = 0;
  std::vector<T> data_;
};

/// One network realization: geometry, large-scale gains and spatial
/// correlation. Construct through make_snapshot so the invariants hold.
struct Snapshot {
  Topology topology;
  Eigen::MatrixXd beta;       // K x L linear gains
  Eigen::MatrixXd shadow_db;  // K x L
  PairArray<HermitianMatrix> R;
  PairArray<ComplexMatrix> R_factor;  // F with F F^H = R

  int devices() const { return static_cast<int>(beta.rows()); }
  int aps() const { return static_cast<int>(beta.cols()); }
  int antennas() const { return static_cast<int>(R(0, 0).dim()); }
};

/// Validates trace(R_kl)/N = beta_kl (1e-9 relative) and R_kl PSD, and
/// precomputes the sampling factors.
Snapshot make_snapshot(Topology topology, Eigen::MatrixXd beta, Eigen::MatrixXd shadow_db,
                       PairArray<HermitianMatrix> R);

struct ChannelRealization {
  PairArray<ComplexVector> h;
};

/// AP coordinates: centers of a sqrt(L) x sqrt(L) grid, or the area center.
std::vector<Point> ap_positions(const SystemConfig& config);

/// APs per ap_positions, devices i.i.d. uniform over the area.
Topology generate_topology(const SystemConfig& config, Rng& rng);

/// Shortest distance between p and any of the nine copies of q translated by
/// {-area, 0, +area} along each axis.
double wrap_distance(Point p, Point q, double area_m);

/// Displacement from p to the nearest wrap-around copy of q.
Point wrap_offset(Point p, Point q, double area_m);

/// K x L shadowing terms in dB. Columns (APs) are independent; within a
/// column the covariance is std^2 * 2^(-x_ki / decorr) with x_ki the
/// wrap-around distance between devices k and i.
Eigen::MatrixXd sample_shadowing(const Topology& topology, const SystemConfig& config, Rng& rng);

/// Covariance used by sample_shadowing for one AP.
Eigen::MatrixXd shadowing_covariance(const Topology& topology, const SystemConfig& config);

/// 3GPP UMi gain in linear scale; distances below ref_dist_m are floored.
double large_scale_gain(double distance_m, double shadow_db, const SystemConfig& config);

/// Gaussian local scattering correlation for a half-wavelength ULA using the
/// small-angular-spread closed form:
///   [R]_mn = beta e^{j pi (m-n) sin(phi)} e^{-(sigma^2/2) (pi (m-n) cos(phi))^2}.
HermitianMatrix local_scattering_R(double beta, double nominal_angle_rad, int antennas,
                                   double asd_deg);

Snapshot build_snapshot(const SystemConfig& config, Rng& rng);

/// Same as build_snapshot but with the devices placed in advance (used to put
/// the cellular baseline over the same user drop as the cell-free network).
Snapshot build_snapshot(const SystemConfig& config, const std::vector<Point>& devices,
                        Rng& shadow_rng);

ChannelRealization sample_channels(const Snapshot& snapshot, Rng& rng);

}  // namespace aircomp
