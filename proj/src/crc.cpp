#include "snvsim/crc.hpp"

#include <cmath>

namespace snvsim {

CrcDecision classify_counts(std::int64_t counts, const CrcConfig& config) {
    if (counts < 0) throw std::invalid_argument("classify_counts: counts must be >= 0");
    if (counts >= config.c_pass) return CrcDecision::Pass;
    if (counts >= config.c_repump) return CrcDecision::Retry;
    return CrcDecision::Repump;
}

ClockedCounter probe_window_counts(EmitterState& state, const CrcConfig& config,
                                   const EmitterParams& params, RngStream& rng) {
    config.validate();
    const int n_bins = int(std::llround(config.probe_duration_us / config.clock_period_us));
    const DriveField drive = DriveField::cw(params, config.probe_power_nw,
                                            config.probe_laser_offset_mhz);

    // Draw the window totals exactly as a single probe call would, then
    // distribute the events uniformly over their emission intervals:
    // signal events over [0, ion_time), dark events over the whole window.
    const ProbeResult pr = probe_with_ionization(state, drive, config.probe_duration_us,
                                                 params, rng);

    ClockedCounter counter;
    counter.bin_counts.assign(n_bins, 0);
    const double signal_window_us = pr.ion_time_us.value_or(config.probe_duration_us);

    auto deposit = [&](double t_us) {
        int bin = int(t_us / config.clock_period_us);
        if (bin >= n_bins) bin = n_bins - 1;
        ++counter.bin_counts[bin];
    };
    for (std::int64_t i = 0; i < pr.signal_counts; ++i) deposit(rng.uniform() * signal_window_us);
    for (std::int64_t i = 0; i < pr.dark_counts; ++i)
        deposit(rng.uniform() * config.probe_duration_us);
    return counter;
}

CrcOutcome crc_run(EmitterState& state, const CrcConfig& config, const EmitterParams& params,
                   RngStream& rng) {
    config.validate();
    CrcOutcome out;
    const double probe_slot =
        std::ceil(config.probe_duration_us / config.clock_period_us) * config.clock_period_us;
    const double repump_slot =
        std::ceil(config.repump_duration_us / config.clock_period_us) * config.clock_period_us;

    while (config.max_attempts == 0 || out.attempts < config.max_attempts) {
        const ClockedCounter window = probe_window_counts(state, config, params, rng);
        ++out.attempts;
        out.elapsed_us += probe_slot;
        out.final_counts = window.total();

        switch (classify_counts(out.final_counts, config)) {
            case CrcDecision::Pass:
                out.heralded = true;
                out.heralded_detuning_mhz =
                    state.center_detuning_mhz - config.probe_laser_offset_mhz;
                return out;
            case CrcDecision::Retry:
                break;
            case CrcDecision::Repump:
                repump_apply(state, config.repump_dose_uw_us(), params, rng);
                ++out.repumps;
                out.elapsed_us += repump_slot;
                break;
        }
    }
    return out;  // heralded = false: attempt budget exhausted
}

}  // namespace snvsim
