#pragma once

#include <optional>
#include <string>

#include "snvsim/config.hpp"
#include "snvsim/records.hpp"

namespace snvsim {

// Built-in run configuration for each experiment type; these carry the
// calibrated defaults the acceptance suite is anchored to.
RunConfig default_run_config(const std::string& experiment_type);

// Run the configured experiment and package the results as a record file
// (schema per experiment family, config hash and seed in the header).
RecordFile run_and_record(const RunConfig& cfg);

struct AnalyzeOptions {
    std::optional<double> window_mhz;       // dominant-peak window for line fits
    std::optional<std::int64_t> threshold;  // pair-statistics conditioning threshold
};

// Model fits appropriate to the input schema; output schema "fits.v1"
// (one row per fitted parameter).
RecordFile analyze_fit(const RecordFile& in, const AnalyzeOptions& opts = {});

// Summary statistics appropriate to the input schema; output schema "stats.v1".
RecordFile analyze_stats(const RecordFile& in, const AnalyzeOptions& opts = {});

// Plot-ready columnar data for one of the figure panels:
// 1d 2b 2c 2d 3c 4b 4c 4e 5b 5c
RecordFile report_figure(const std::string& name, std::uint64_t seed, int n_workers);

}  // namespace snvsim
