#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "snvsim/crc.hpp"
#include "snvsim/emitter.hpp"

namespace snvsim {

// ---------------------------------------------------------------- pairs ---

// repump -> probe1 -> probe2, repeated; charge and detuning carry over
// between shots inside a block.
struct DoubleProbeConfig {
    double probe_power_nw = 100.0;
    double probe_duration_us = 50.0;
    double repump_power_uw = 100.0;
    double repump_duration_us = 500.0;
    std::int64_t n_shots = 10000;
    int block_size = 512;  // independent chains of this many shots
};

// probe3 -> pump -> probe4, repeated back to back.
struct PumpProbeConfig {
    double probe_power_nw = 100.0;
    double probe_duration_us = 50.0;
    double pump_power_uw = 100.0;
    double pump_duration_us = 500.0;
    std::int64_t n_shots = 10000;
    int block_size = 512;
};

struct PairShot {
    std::int32_t c_first = 0;
    std::int32_t c_second = 0;
    bool ion_first = false;   // ionized during the first probe
    bool ion_second = false;  // ionized during the second probe
    std::uint8_t charge_before = 0;  // 0 bright, 1 dark, entering the first probe
    double center_before_mhz = 0.0;
};

std::vector<PairShot> run_double_probe(const DoubleProbeConfig& cfg, const EmitterParams& params,
                                       std::uint64_t seed, int n_workers = 1);
std::vector<PairShot> run_probe_repump_probe(const PumpProbeConfig& cfg,
                                             const EmitterParams& params, std::uint64_t seed,
                                             int n_workers = 1);

// ----------------------------------------------------------------- PLE ----

enum class RepumpPolicy : std::uint8_t { None, ConditionalThreshold, CrcBeforeScan };

struct SecondEmitter {
    double offset_mhz = -300.0;
    double relative_strength = 0.5;
};

struct PleScanConfig {
    double f_start_mhz = -500.0;
    double f_end_mhz = 500.0;
    double scan_rate_ghz_per_s = 1.3;
    double dwell_us = 1000.0;
    int n_scans = 100;
    double probe_power_nw = 3.0;
    RepumpPolicy policy = RepumpPolicy::None;
    double threshold_factor = 1.5;       // ConditionalThreshold: flag when
                                         // row max < factor * mean of prior row maxima
    double repump_power_uw = 1.0;        // conditional-policy repump pulse
    double repump_duration_us = 50000.0;
    CrcConfig crc;                       // CrcBeforeScan policy
    std::optional<SecondEmitter> second_emitter;
    int block_size_scans = 50;

    double step_mhz() const { return scan_rate_ghz_per_s * 1e3 * dwell_us * 1e-6; }
    int n_steps() const;
    std::vector<double> frequency_axis() const;
    void validate() const;
};

struct PleRow {
    std::int32_t scan = 0;
    bool repumped_before = false;  // conditional policy fired before this scan
    bool crc_heralded = false;
    std::int64_t crc_attempts = 0;
    std::int64_t crc_repumps = 0;
    std::int64_t crc_counts = 0;
    double center_truth_mhz = 0.0;  // emitter center entering the scan
    std::uint8_t charge_truth = 0;
    std::vector<std::int32_t> counts;
};

std::vector<PleRow> run_ple_scan(const PleScanConfig& cfg, const EmitterParams& params,
                                 std::uint64_t seed, int n_workers = 1);

// ---------------------------------------------------------------- Rabi ----

struct RabiConfig {
    CrcConfig probe;        // probe/repump settings; thresholds used when live_crc
    bool live_crc = false;  // herald in real time instead of post-selecting
    double pulse_power_nw = 17.5;
    double pulse_duration_ns = 30.0;
    double bin_width_ns = 0.25;
    int n_reps = 500;
    std::int64_t n_sequences = 2000;
    std::vector<std::int64_t> interval_edges = {20, 60, 100};  // probe-count intervals
    int block_size = 256;
};

struct RabiTraces {
    std::vector<double> t_ns;                      // bin centers
    std::vector<std::int64_t> probe_counts;       // per sequence
    std::vector<std::int32_t> interval_of;        // per sequence
    std::vector<std::int64_t> readout_totals;     // per sequence, summed over bins
    std::vector<std::vector<std::int64_t>> interval_traces;  // [interval][bin]
    std::vector<std::int64_t> interval_sequences;
    std::size_t n_intervals() const { return interval_traces.size(); }
};

RabiTraces run_rabi(const RabiConfig& cfg, const EmitterParams& params, std::uint64_t seed,
                    int n_workers = 1);

// --------------------------------------------------------------- Ramsey ---

struct RamseyConfig {
    CrcConfig crc;
    std::vector<double> tau_grid_ns;  // filled with 0.5..12 by default_grid()
    int n_phases = 8;                 // equally spaced over [0, 2pi)
    std::int64_t n_heralds_per_point = 200;
    int n_reps_per_herald = 500;
    double readout_window_ns = 5.0;
    bool ideal_pulses = true;
    double pulse_rabi_mhz = 100.0;  // finite-duration pulse mode
    bool include_decay = true;
    double mixed_tau_ns = 150.0;

    static std::vector<double> default_grid();
};

struct RamseyPoint {
    double tau_ns = 0.0;
    double phi_rad = 0.0;
    bool mixed_reference = false;
    std::int64_t counts = 0;  // integrated over the readout window and reps
    std::int64_t n_reps = 0;
    std::int64_t crc_attempts = 0;
    std::int64_t crc_final_counts = 0;
    double heralded_detuning_mhz = 0.0;
};

std::vector<RamseyPoint> run_ramsey(const RamseyConfig& cfg, const EmitterParams& params,
                                    std::uint64_t seed, int n_workers = 1);

// ------------------------------------------------------------------- g2 ---

struct G2Config {
    double power_nw = 80.0;
    double duration_s = 0.2;            // photon stream length
    double collection_efficiency = 0.2;  // HBT path collection (thins the stream)
    double bin_width_ns = 1.0;
    double max_tau_ns = 120.0;
    double background_fraction = 0.0;  // background rate / detected signal rate
    int n_segments = 16;               // independent stream segments
};

struct G2Histogram {
    std::vector<double> tau_ns;  // bin centers
    std::vector<std::int64_t> pair_counts;
    std::vector<double> normalized;  // plateau-normalized
    std::int64_t n_detections = 0;
};

G2Histogram run_g2(const G2Config& cfg, const EmitterParams& params, std::uint64_t seed,
                   int n_workers = 1);

}  // namespace snvsim
