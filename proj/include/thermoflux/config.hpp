#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "thermoflux/simulation.hpp"

namespace thermoflux {

/// Built-in defaults: the demo slab of SimulationConfig.
SimulationConfig default_config();

/// Defaults for dataset generation: same slab, but snapshots on a dense
/// 2..100 s grid so node histories form real time series.
SimulationConfig dataset_default_config();

/// Parse a JSON document over the defaults. Unknown keys raise ConfigError
/// naming the offending key; so does any violated constraint.
SimulationConfig parse_config(const std::string& json_text);
SimulationConfig load_config(const std::filesystem::path& path);

/// Numeric override by dotted key (sweep support), e.g. "bc.ramp_rate".
void apply_override(SimulationConfig& config, const std::string& key,
                    double value);

/// Sweep section of a config file, if present: {"key": ..., "values": [...]}.
struct SweepSpec {
  std::string key;
  std::vector<double> values;
};
SweepSpec sweep_from_file(const std::filesystem::path& path);

/// Canonical JSON for the effective config (sorted keys) and its FNV-1a hash.
std::string canonical_config_json(const SimulationConfig& config);
std::uint64_t config_hash(const SimulationConfig& config);

/// PMMA property preset: material reference values plus a matching band set.
MaterialModel pmma_material();
std::vector<SpectralBand> pmma_bands();

}  // namespace thermoflux
