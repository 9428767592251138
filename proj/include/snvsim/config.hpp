#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "snvsim/experiments.hpp"

namespace snvsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// "crc-sweep": CRC-heralded PLE scans repeated for several pass thresholds.
struct CrcSweepConfig {
    std::vector<std::int64_t> c_pass_values = {50, 70, 90, 110};
    PleScanConfig ple;  // policy forced to CrcBeforeScan
};

using ExperimentConfig = std::variant<PleScanConfig, DoubleProbeConfig, PumpProbeConfig,
                                      RabiConfig, RamseyConfig, G2Config, CrcSweepConfig>;

struct RunConfig {
    std::uint64_t seed = 1;
    int n_workers = 1;
    std::string output_path = "out.tsv";
    EmitterParams emitter = EmitterParams::snv_a();
    std::string emitter_preset = "snv_a";  // "" when given as an explicit object
    ExperimentConfig experiment = DoubleProbeConfig{};

    const char* experiment_type() const;
};

// Parse a JSON run configuration. Unknown keys, unit mismatches and
// invariant violations raise ConfigError naming the offending field.
RunConfig parse_config(const std::string& text);

// Canonical serialization; parse(serialize(c)) == c.
std::string serialize_config(const RunConfig& cfg);

// FNV-1a over the canonical serialization; stamped into record headers.
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace snvsim
