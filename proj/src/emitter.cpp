#include "snvsim/emitter.hpp"

#include <algorithm>

namespace snvsim {

double scattering_rate(double delta_mhz, double s, const EmitterParams& params) {
    if (s < 0.0) throw std::invalid_argument("scattering_rate: saturation parameter s < 0");
    if (s == 0.0) return 0.0;
    const double x = 2.0 * delta_mhz / params.natural_linewidth_mhz;
    return 0.5 * params.gamma_rad_per_s() * s / (1.0 + s + x * x);
}

std::int64_t sample_counts(double emitted_rate_per_s, double duration_us,
                           const EmitterParams& params, RngStream& rng) {
    if (emitted_rate_per_s < 0.0 || duration_us < 0.0)
        throw std::invalid_argument("sample_counts: negative rate or duration");
    const double mean =
        (emitted_rate_per_s * params.detection_efficiency + params.dark_count_rate_hz) *
        duration_us * 1e-6;
    return rng.poisson(mean);
}

ProbeResult probe_with_ionization(EmitterState& state, const DriveField& drive,
                                  double duration_us, const EmitterParams& params,
                                  RngStream& rng) {
    if (duration_us <= 0.0) throw std::invalid_argument("probe: duration must be > 0");
    ProbeResult res;
    const double t_s = duration_us * 1e-6;

    if (state.charge == Charge::Dark) {
        res.dark_counts = rng.poisson(params.dark_count_rate_hz * t_s);
        res.counts = res.dark_counts;
        return res;
    }

    const double rate =
        scattering_rate(drive.detuning_from(state), params.saturation(drive.power_nw), params);
    const double ion_rate = params.ionization_yield * rate;  // jumps/s
    const double t_ion_s = rng.exponential(ion_rate);

    const double t_sig_s = std::min(t_ion_s, t_s);
    res.signal_counts = rng.poisson(rate * params.detection_efficiency * t_sig_s);
    res.dark_counts = rng.poisson(params.dark_count_rate_hz * t_s);
    res.counts = res.signal_counts + res.dark_counts;

    if (t_ion_s < t_s) {
        state.charge = Charge::Dark;
        res.ion_time_us = t_ion_s * 1e6;
    }
    return res;
}

void repump_apply(EmitterState& state, double dose_uw_us, const EmitterParams& params,
                  RngStream& rng) {
    if (dose_uw_us < 0.0) throw std::invalid_argument("repump_apply: dose must be >= 0");
    if (dose_uw_us == 0.0) return;
    const double p_act = 1.0 - std::exp(-dose_uw_us / params.repump_dose_scale);
    if (!rng.bernoulli(p_act)) return;
    if (rng.bernoulli(params.repump_max_prob)) {
        state.charge = Charge::Bright;
        state.center_detuning_mhz = spectral_jump_sample(params, rng);
    } else {
        state.charge = Charge::Dark;
    }
    state.rho = DensityMatrix{};  // optical coherence does not survive the pump
}

double spectral_jump_sample(const EmitterParams& params, RngStream& rng) {
    return rng.normal(0.0, params.inhomogeneous_sigma_mhz);
}

}  // namespace snvsim
