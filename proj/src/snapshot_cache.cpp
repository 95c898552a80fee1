#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include "aircomp/harness.hpp"

namespace aircomp {

namespace {

constexpr std::array<char, 4> kMagic = {'A', 'C', 'S', 'N'};
constexpr std::uint32_t kVersion = 1;

class Fnv1a {
 public:
  template <typename T>
  void add(const T& value) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (unsigned char c : bytes) {
      hash_ ^= c;
      hash_ *= 0x100000001b3ULL;
    }
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("snapshot file is truncated");
  return value;
}

}  // namespace

std::uint64_t scenario_hash(const SystemConfig& config) {
  Fnv1a h;
  h.add(static_cast<std::int32_t>(config.L));
  h.add(static_cast<std::int32_t>(config.N));
  h.add(static_cast<std::int32_t>(config.K));
  h.add(static_cast<std::int32_t>(config.placement));
  for (double x : {config.area_m, config.pathloss_beta0_db, config.pathloss_alpha,
                   config.ref_dist_m, config.shadow_std_db, config.shadow_decorr_m,
                   config.asd_deg}) {
    h.add(x);
  }
  return h.value();
}

void write_snapshot(std::ostream& out, const Snapshot& snap) {
  static_assert(std::endian::native == std::endian::little, "snapshot files are little-endian");
  const auto K = static_cast<std::uint32_t>(snap.devices());
  const auto L = static_cast<std::uint32_t>(snap.aps());
  const auto N = static_cast<std::uint32_t>(snap.antennas());
  out.write(kMagic.data(), kMagic.size());
  put(out, kVersion);
  put(out, K);
  put(out, L);
  put(out, N);
  for (const Point& p : snap.topology.ap_positions) {
    put(out, p.x);
    put(out, p.y);
  }
  for (const Point& p : snap.topology.device_positions) {
    put(out, p.x);
    put(out, p.y);
  }
  for (std::uint32_t k = 0; k < K; ++k) {
    for (std::uint32_t l = 0; l < L; ++l) {
      put(out, snap.beta(k, l));
      put(out, snap.shadow_db(k, l));
      const ComplexMatrix& R = snap.R(k, l).matrix();
      for (std::uint32_t i = 0; i < N; ++i) {
        for (std::uint32_t j = 0; j < N; ++j) {
          put(out, R(i, j).real());
          put(out, R(i, j).imag());
        }
      }
    }
  }
}

Snapshot read_snapshot(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw std::runtime_error("not a snapshot file");
  if (get<std::uint32_t>(in) != kVersion) throw std::runtime_error("unsupported snapshot version");
  const auto K = get<std::uint32_t>(in);
  const auto L = get<std::uint32_t>(in);
  const auto N = get<std::uint32_t>(in);
  if (K == 0 || L == 0 || N == 0 || K > 100000 || L > 100000 || N > 100000) {
    throw std::runtime_error("snapshot header has implausible dimensions");
  }
  Topology topo;
  for (std::uint32_t l = 0; l < L; ++l) {
    const double x = get<double>(in);
    topo.ap_positions.push_back({x, get<double>(in)});
  }
  for (std::uint32_t k = 0; k < K; ++k) {
    const double x = get<double>(in);
    topo.device_positions.push_back({x, get<double>(in)});
  }
  Eigen::MatrixXd beta(K, L);
  Eigen::MatrixXd shadow(K, L);
  PairArray<HermitianMatrix> R(static_cast<int>(K), static_cast<int>(L));
  for (std::uint32_t k = 0; k < K; ++k) {
    for (std::uint32_t l = 0; l < L; ++l) {
      beta(k, l) = get<double>(in);
      shadow(k, l) = get<double>(in);
      ComplexMatrix m(N, N);
      for (std::uint32_t i = 0; i < N; ++i) {
        for (std::uint32_t j = 0; j < N; ++j) {
          const double re = get<double>(in);
          m(i, j) = cd(re, get<double>(in));
        }
      }
      R(static_cast<int>(k), static_cast<int>(l)) = HermitianMatrix(m);
    }
  }
  return make_snapshot(std::move(topo), std::move(beta), std::move(shadow), std::move(R));
}

SnapshotCache::SnapshotCache(std::filesystem::path directory) : dir_(std::move(directory)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path SnapshotCache::path_for(std::uint64_t seed, std::uint64_t index,
                                              const SystemConfig& config) const {
  std::ostringstream name;
  name << "snap_" << seed << '_' << index << '_' << std::hex << scenario_hash(config) << ".bin";
  return dir_ / name.str();
}

std::optional<Snapshot> SnapshotCache::load(std::uint64_t seed, std::uint64_t index,
                                            const SystemConfig& config) const {
  std::ifstream in(path_for(seed, index, config), std::ios::binary);
  if (!in) return std::nullopt;
  return read_snapshot(in);
}

void SnapshotCache::store(std::uint64_t seed, std::uint64_t index, const SystemConfig& config,
                          const Snapshot& snapshot) const {
  const auto final_path = path_for(seed, index, config);
  auto tmp = final_path;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    write_snapshot(out, snapshot);
  }
  std::filesystem::rename(tmp, final_path);
}

}  // namespace aircomp
