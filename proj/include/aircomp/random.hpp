#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "aircomp/numerics.hpp"

namespace aircomp {

using Rng = std::mt19937_64;

/// Independent sub-streams of one snapshot. Each consumer draws from its own
/// stream so adding a level or a power point never shifts another's draws.
enum class Stream : std::uint32_t {
  kTopology = 1,
  kShadowing = 2,
  kPilotAssignment = 3,
  kChannels = 4,
  kPilotNoise = 5,
  kLsfdStatistics = 6,
  kEvaluation = 7,
  kCellularShadowing = 8,
  kCellularChannels = 9,
  kCellularPilotNoise = 10,
};

/// Deterministic generator for (seed, snapshot index, stream).
inline Rng make_rng(std::uint64_t seed, std::uint64_t index, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

/// Circularly symmetric complex Gaussian with E{|z|^2} = variance.
inline cd complex_normal(Rng& rng, double variance = 1.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = std::sqrt(variance / 2.0);
  const double re = normal(rng);
  const double im = normal(rng);
  return {scale * re, scale * im};
}

inline ComplexVector complex_normal_vector(Rng& rng, Eigen::Index n, double variance = 1.0) {
  ComplexVector z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = complex_normal(rng, variance);
  return z;
}

}  // namespace aircomp
