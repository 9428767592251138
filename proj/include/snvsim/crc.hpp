#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "snvsim/emitter.hpp"

namespace snvsim {

// Charge-resonance check: clocked threshold counting on a resonant probe
// with a repump/retry loop that heralds the emitter bright and on
// resonance with the probe laser.
struct CrcConfig {
    std::int64_t c_pass = 110;
    std::int64_t c_repump = 10;
    double probe_duration_us = 500.0;
    double probe_power_nw = 100.0;
    double repump_duration_us = 500.0;
    double repump_power_uw = 100.0;
    double clock_period_us = 10.0;
    std::int64_t max_attempts = 10000;  // 0 = unbounded
    double probe_laser_offset_mhz = 0.0;

    double repump_dose_uw_us() const { return repump_power_uw * repump_duration_us; }

    void validate() const {
        auto want = [](bool ok, const char* what) {
            if (!ok) throw std::invalid_argument(std::string("CrcConfig: ") + what);
        };
        want(c_repump >= 0, "c_repump must be >= 0");
        want(c_repump <= c_pass, "c_repump must be <= c_pass");
        want(clock_period_us > 0, "clock_period must be > 0");
        want(probe_duration_us > 0, "probe_duration must be > 0");
        const double ratio = probe_duration_us / clock_period_us;
        want(std::abs(ratio - std::round(ratio)) < 1e-9,
             "probe_duration must be an integer multiple of clock_period");
        want(max_attempts >= 0, "max_attempts must be >= 0");
    }
};

enum class CrcDecision : std::uint8_t { Pass, Retry, Repump };

struct CrcOutcome {
    bool heralded = false;
    std::int64_t attempts = 0;  // probe pulses issued
    std::int64_t repumps = 0;
    std::int64_t final_counts = 0;
    double heralded_detuning_mhz = 0.0;  // emitter center minus probe laser at herald
    double elapsed_us = 0.0;             // pulse time, quantized to the clock
};

// Live per-cycle counts of one probe window, as the microcontroller sees them.
struct ClockedCounter {
    std::vector<std::int64_t> bin_counts;
    std::int64_t total() const {
        std::int64_t t = 0;
        for (auto b : bin_counts) t += b;
        return t;
    }
};

// counts >= c_pass -> Pass; c_repump <= counts < c_pass -> Retry;
// counts < c_repump -> Repump. Both boundaries are inclusive on the side
// stated: equality at c_pass passes, equality at c_repump retries.
CrcDecision classify_counts(std::int64_t counts, const CrcConfig& config);

// One probe window binned on clock boundaries. The total over bins equals
// what probe_with_ionization reports for the same stream state; bins after
// an ionization jump hold dark counts only.
ClockedCounter probe_window_counts(EmitterState& state, const CrcConfig& config,
                                   const EmitterParams& params, RngStream& rng);

// The retry loop: probe, classify, then herald / re-probe / repump-and-probe
// until c_pass is met or max_attempts probes were spent.
CrcOutcome crc_run(EmitterState& state, const CrcConfig& config, const EmitterParams& params,
                   RngStream& rng);

}  // namespace snvsim
