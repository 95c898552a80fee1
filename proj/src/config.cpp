#include "aircomp/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <set>
#include <sstream>

namespace aircomp {

using nlohmann::json;

namespace {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const json& object, const std::string& prefix,
                    const std::set<std::string>& known) {
  for (const auto& [key, value] : object.items()) {
    if (!known.contains(key)) throw ConfigError(join(prefix, key), "unknown key");
  }
}

const json& require_object(const json& value, const std::string& key) {
  if (!value.is_object()) throw ConfigError(key, "expected an object");
  return value;
}

int read_int(const json& value, const std::string& key) {
  if (!value.is_number_integer()) throw ConfigError(key, "expected an integer");
  const auto v = value.get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError(key, "integer out of range");
  }
  return static_cast<int>(v);
}

double read_double(const json& value, const std::string& key) {
  if (!value.is_number()) throw ConfigError(key, "expected a number");
  const double v = value.get<double>();
  if (!std::isfinite(v)) throw ConfigError(key, "expected a finite number");
  return v;
}

bool read_bool(const json& value, const std::string& key) {
  if (!value.is_boolean()) throw ConfigError(key, "expected true or false");
  return value.get<bool>();
}

std::uint64_t read_seed(const json& value, const std::string& key) {
  if (value.is_number_unsigned()) return value.get<std::uint64_t>();
  if (value.is_number_integer() && value.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(value.get<std::int64_t>());
  }
  throw ConfigError(key, "expected a non-negative integer");
}

std::vector<double> read_power_grid(const json& value, const std::string& key) {
  if (value.is_number()) return {read_double(value, key)};
  if (value.is_string()) {
    try {
      return expand_range(value.get<std::string>());
    } catch (const ConfigError& e) {
      throw ConfigError(key, e.what());
    }
  }
  if (value.is_array()) {
    std::vector<double> grid;
    for (std::size_t i = 0; i < value.size(); ++i) {
      grid.push_back(read_double(value[i], key + "[" + std::to_string(i) + "]"));
    }
    return grid;
  }
  throw ConfigError(key, "expected a number, a list, or \"start:step:stop\"");
}

void read_system(const json& obj, SystemConfig& sys) {
  const std::string p = "system";
  require_object(obj, p);
  reject_unknown(obj, p,
                 {"L", "N", "K", "tau_p", "tau_c", "pilot_power_dbm",
                  "pilot_power_dbm_per_device", "noise_power_dbm", "area_m",
                  "pathloss_beta0_db", "pathloss_alpha", "ref_dist_m", "shadow_std_db",
                  "shadow_decorr_m", "asd_deg"});
  auto int_field = [&](const char* name, int& target) {
    if (obj.contains(name)) target = read_int(obj.at(name), join(p, name));
  };
  auto dbl_field = [&](const char* name, double& target) {
    if (obj.contains(name)) target = read_double(obj.at(name), join(p, name));
  };
  int_field("L", sys.L);
  int_field("N", sys.N);
  int_field("K", sys.K);
  int_field("tau_p", sys.tau_p);
  int_field("tau_c", sys.tau_c);
  dbl_field("pilot_power_dbm", sys.pilot_power_dbm);
  dbl_field("noise_power_dbm", sys.noise_power_dbm);
  dbl_field("area_m", sys.area_m);
  dbl_field("pathloss_beta0_db", sys.pathloss_beta0_db);
  dbl_field("pathloss_alpha", sys.pathloss_alpha);
  dbl_field("ref_dist_m", sys.ref_dist_m);
  dbl_field("shadow_std_db", sys.shadow_std_db);
  dbl_field("shadow_decorr_m", sys.shadow_decorr_m);
  dbl_field("asd_deg", sys.asd_deg);
  if (obj.contains("pilot_power_dbm_per_device")) {
    const std::string key = join(p, "pilot_power_dbm_per_device");
    const json& list = obj.at("pilot_power_dbm_per_device");
    if (!list.is_array()) throw ConfigError(key, "expected a list");
    sys.pilot_power_dbm_per_device.clear();
    for (const auto& v : list) sys.pilot_power_dbm_per_device.push_back(read_double(v, key));
  }
}

void apply_override(json& document, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(assignment, "override must look like key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &document;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError(key, "empty path component");
    if (!node->is_object()) throw ConfigError(key, "parent is not an object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::vector<double> expand_range(const std::string& text) {
  auto parse = [&](std::string_view part) {
    double v = 0.0;
    const auto* first = part.data();
    const auto* last = part.data() + part.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
      throw ConfigError("", "cannot parse \"" + std::string(part) + "\" as a number");
    }
    return v;
  };
  const auto first_colon = text.find(':');
  if (first_colon == std::string::npos) return {parse(text)};
  const auto second_colon = text.find(':', first_colon + 1);
  if (second_colon == std::string::npos || text.find(':', second_colon + 1) != std::string::npos) {
    throw ConfigError("", "range must be start:step:stop");
  }
  const std::string_view view(text);
  const double start = parse(view.substr(0, first_colon));
  const double step = parse(view.substr(first_colon + 1, second_colon - first_colon - 1));
  const double stop = parse(view.substr(second_colon + 1));
  if (!(step > 0.0)) throw ConfigError("", "range step must be positive");
  if (stop < start) throw ConfigError("", "range stop is below start");
  std::vector<double> values;
  const double slack = 1e-9 * step;
  for (int i = 0;; ++i) {
    const double v = start + i * step;
    if (v > stop + slack) break;
    values.push_back(v);
  }
  return values;
}

ExperimentSpec parse_config(const json& input, const std::vector<std::string>& overrides) {
  json document = input.is_null() ? json::object() : input;
  if (!document.is_object()) throw ConfigError("", "configuration must be a JSON object");
  for (const auto& o : overrides) apply_override(document, o);

  reject_unknown(document, "",
                 {"system", "max_power_dbm", "levels", "snapshots", "trials_per_snapshot",
                  "lsfd_samples", "seed", "workers", "cellular_antennas", "pilots",
                  "perfect_csi", "optimizer", "level2"});

  ExperimentSpec spec = default_experiment();
  if (document.contains("system")) read_system(document.at("system"), spec.base);
  if (document.contains("max_power_dbm")) {
    spec.power_grid_dbm = read_power_grid(document.at("max_power_dbm"), "max_power_dbm");
  }
  if (document.contains("levels")) {
    const json& list = document.at("levels");
    if (!list.is_array()) throw ConfigError("levels", "expected a list");
    spec.levels.clear();
    for (const auto& item : list) {
      const auto tag = item.is_string() ? parse_level(item.get<std::string>()) : std::nullopt;
      if (!tag) throw ConfigError("levels", "unknown level " + item.dump());
      spec.levels.push_back(*tag);
    }
  }
  if (document.contains("snapshots")) {
    spec.snapshots = read_int(document.at("snapshots"), "snapshots");
  }
  if (document.contains("trials_per_snapshot")) {
    spec.trials_per_snapshot = read_int(document.at("trials_per_snapshot"), "trials_per_snapshot");
  }
  if (document.contains("lsfd_samples")) {
    spec.lsfd_samples = read_int(document.at("lsfd_samples"), "lsfd_samples");
  }
  if (document.contains("seed")) spec.seed = read_seed(document.at("seed"), "seed");
  if (document.contains("workers")) spec.workers = read_int(document.at("workers"), "workers");
  if (document.contains("cellular_antennas")) {
    spec.cellular_antennas = read_int(document.at("cellular_antennas"), "cellular_antennas");
  }
  if (document.contains("perfect_csi")) {
    spec.perfect_csi = read_bool(document.at("perfect_csi"), "perfect_csi");
  }
  if (document.contains("pilots")) {
    const json& obj = require_object(document.at("pilots"), "pilots");
    reject_unknown(obj, "pilots", {"orthogonal"});
    if (obj.contains("orthogonal")) {
      spec.orthogonal_pilots = read_bool(obj.at("orthogonal"), "pilots.orthogonal");
    }
  }
  if (document.contains("optimizer")) {
    const json& obj = require_object(document.at("optimizer"), "optimizer");
    reject_unknown(obj, "optimizer", {"max_iter", "rel_tol"});
    if (obj.contains("max_iter")) {
      spec.optimizer.max_iter = read_int(obj.at("max_iter"), "optimizer.max_iter");
    }
    if (obj.contains("rel_tol")) {
      spec.optimizer.rel_tol = read_double(obj.at("rel_tol"), "optimizer.rel_tol");
    }
  }
  if (document.contains("level2")) {
    const json& obj = require_object(document.at("level2"), "level2");
    reject_unknown(obj, "level2", {"refine_b"});
    if (obj.contains("refine_b")) {
      spec.level2_refine_b = read_bool(obj.at("refine_b"), "level2.refine_b");
    }
  }
  spec.validate();
  return spec;
}

ExperimentSpec parse_config(const std::filesystem::path& path,
                            const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  json document = json::parse(in, nullptr, false);
  if (document.is_discarded()) {
    throw ConfigError("", "config file " + path.string() + " is not valid JSON");
  }
  return parse_config(document, overrides);
}

json spec_to_json(const ExperimentSpec& spec) {
  const SystemConfig& s = spec.base;
  json levels = json::array();
  for (LevelTag l : spec.levels) levels.push_back(to_string(l));
  return {
      {"system",
       {{"L", s.L},
        {"N", s.N},
        {"K", s.K},
        {"tau_p", s.tau_p},
        {"tau_c", s.tau_c},
        {"pilot_power_dbm", s.pilot_power_dbm},
        {"pilot_power_dbm_per_device", s.pilot_power_dbm_per_device},
        {"noise_power_dbm", s.noise_power_dbm},
        {"area_m", s.area_m},
        {"pathloss_beta0_db", s.pathloss_beta0_db},
        {"pathloss_alpha", s.pathloss_alpha},
        {"ref_dist_m", s.ref_dist_m},
        {"shadow_std_db", s.shadow_std_db},
        {"shadow_decorr_m", s.shadow_decorr_m},
        {"asd_deg", s.asd_deg}}},
      {"max_power_dbm", spec.power_grid_dbm},
      {"levels", levels},
      {"snapshots", spec.snapshots},
      {"trials_per_snapshot", spec.trials_per_snapshot},
      {"lsfd_samples", spec.lsfd_samples},
      {"seed", spec.seed},
      {"workers", spec.workers},
      {"cellular_antennas", spec.cellular_antenna_count()},
      {"pilots", {{"orthogonal", spec.orthogonal_pilots}}},
      {"perfect_csi", spec.perfect_csi},
      {"optimizer", {{"max_iter", spec.optimizer.max_iter}, {"rel_tol", spec.optimizer.rel_tol}}},
      {"level2", {{"refine_b", spec.level2_refine_b}}},
  };
}

std::string config_hash(const ExperimentSpec& spec) {
  json j = spec_to_json(spec);
  j.erase("workers");
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << fnv1a(j.dump());
  return out.str();
}

std::string format_number(double value, int significant_digits) {
  char buf[64];
  const auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, significant_digits);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

void emit_results(const std::vector<MseRecord>& records, OutputFormat format,
                  const ExperimentSpec& spec, bool partial, std::ostream& out) {
  const std::string hash = config_hash(spec);
  if (format == OutputFormat::kCsv) {
    out << "level,power_dbm,mse_mean,mse_db,mse_stderr,snapshots,seed,config_hash\n";
    for (const auto& r : records) {
      out << to_string(r.level) << ',' << format_number(r.power_dbm) << ','
          << format_number(r.mse_mean) << ',' << format_number(mse_to_db(r.mse_mean)) << ','
          << format_number(r.mse_stderr) << ',' << r.snapshots_used << ',' << spec.seed << ','
          << hash << '\n';
    }
    if (partial) out << "partial=true\n";
    return;
  }
  json rows = json::array();
  for (const auto& r : records) {
    rows.push_back({{"level", to_string(r.level)},
                    {"power_dbm", r.power_dbm},
                    {"mse_mean", r.mse_mean},
                    {"mse_db", mse_to_db(r.mse_mean)},
                    {"mse_stderr", r.mse_stderr},
                    {"snapshots", r.snapshots_used},
                    {"seed", spec.seed},
                    {"config_hash", hash}});
  }
  const json document = {{"spec", spec_to_json(spec)},
                         {"config_hash", hash},
                         {"partial", partial},
                         {"records", rows}};
  out << document.dump(2) << '\n';
}

void emit_results(const std::vector<MseRecord>& records, OutputFormat format,
                  const ExperimentSpec& spec, bool partial, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  emit_results(records, format, spec, partial, out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<MseRecord> read_results_json(const json& document) {
  std::vector<MseRecord> records;
  for (const auto& row : document.at("records")) {
    MseRecord r;
    const auto tag = parse_level(row.at("level").get<std::string>());
    if (!tag) throw std::runtime_error("unknown level in results");
    r.level = *tag;
    r.power_dbm = row.at("power_dbm").get<double>();
    r.mse_mean = row.at("mse_mean").get<double>();
    r.mse_stderr = row.at("mse_stderr").get<double>();
    r.snapshots_used = row.at("snapshots").get<int>();
    records.push_back(r);
  }
  return records;
}

}  // namespace aircomp
