#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "aircomp/harness.hpp"

namespace aircomp {

/// Builds an ExperimentSpec from a JSON document plus dotted `key=value`
/// overrides (`system.L=36`, `max_power_dbm=-10:5:30`). Omitted fields take
/// the default_experiment() values. Throws ConfigError naming the key for
/// unknown keys, wrong types and out-of-range values.
ExperimentSpec parse_config(const nlohmann::json& document,
                            const std::vector<std::string>& overrides = {});
ExperimentSpec parse_config(const std::filesystem::path& path,
                            const std::vector<std::string>& overrides = {});

/// Expands "start:step:stop" (inclusive) or a single number.
std::vector<double> expand_range(const std::string& text);

/// Fully resolved spec, every field present.
nlohmann::json spec_to_json(const ExperimentSpec& spec);

/// 16 hex digits identifying everything that affects results (the worker
/// count is excluded).
std::string config_hash(const ExperimentSpec& spec);

enum class OutputFormat { kCsv, kJson };

/// CSV columns: level, power_dbm, mse_mean, mse_db, mse_stderr, snapshots,
/// seed, config_hash. Numbers carry 10 significant digits. A partial sweep
/// ends with a `partial=true` row.
void emit_results(const std::vector<MseRecord>& records, OutputFormat format,
                  const ExperimentSpec& spec, bool partial, std::ostream& out);
/// Same, writing to a file. Throws std::runtime_error (IoError) on failure.
void emit_results(const std::vector<MseRecord>& records, OutputFormat format,
                  const ExperimentSpec& spec, bool partial, const std::filesystem::path& path);

/// Reads the records back from emit_results JSON output.
std::vector<MseRecord> read_results_json(const nlohmann::json& document);

/// Locale-independent shortest form with the given significant digits.
std::string format_number(double value, int significant_digits = 10);

}  // namespace aircomp
