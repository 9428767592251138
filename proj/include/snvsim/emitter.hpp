#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "snvsim/rng.hpp"

namespace snvsim {

inline constexpr double kTwoPi = 6.283185307179586476925287;

// Static physical model of one emitter: a bright two-level optical
// transition plus a dark charge state reached by ionization and recovered
// (probabilistically) by an off-resonant repump that also resamples the
// transition frequency.
//
// Frequencies in the public interface are ordinary (non-angular) MHz;
// angular conversion happens internally.
struct EmitterParams {
    double natural_linewidth_mhz = 31.0;   // FWHM of the optical transition
    double nominal_center_mhz = 0.0;       // detuning origin
    double inhomogeneous_sigma_mhz = 8.0;  // std of post-repump center distribution
    double ionization_yield = 2.8e-6;      // ionization probability per emitted photon
    double detection_efficiency = 1.13513e-2;  // detected per emitted photon
    double dark_count_rate_hz = 100.0;
    double saturation_power_nw = 400.0;        // cw probe path: s = P / P_sat
    double pulse_saturation_power_nw = 0.84;   // ns pulse path (separate transmission)
    double repump_dose_scale = 8000.0;         // uW*us dose giving 1 - 1/e activation
    double repump_max_prob = 0.75;             // bright fraction after a saturating repump

    double gamma_rad_per_s() const { return kTwoPi * natural_linewidth_mhz * 1e6; }
    double gamma_rad_per_ns() const { return kTwoPi * natural_linewidth_mhz * 1e-3; }

    double saturation(double power_nw) const { return power_nw / saturation_power_nw; }

    void validate() const {
        auto want = [](bool ok, const char* what) {
            if (!ok) throw std::invalid_argument(std::string("EmitterParams: ") + what);
        };
        want(natural_linewidth_mhz > 0, "natural_linewidth must be > 0");
        want(inhomogeneous_sigma_mhz >= 0, "inhomogeneous_sigma must be >= 0");
        want(ionization_yield >= 0 && ionization_yield <= 1, "ionization_yield in [0,1]");
        want(detection_efficiency > 0 && detection_efficiency <= 1,
             "detection_efficiency in (0,1]");
        want(dark_count_rate_hz >= 0, "dark_count_rate must be >= 0");
        want(saturation_power_nw > 0, "saturation_power must be > 0");
        want(pulse_saturation_power_nw > 0, "pulse_saturation_power must be > 0");
        want(repump_dose_scale > 0, "repump_dose_scale must be > 0");
        want(repump_max_prob > 0 && repump_max_prob <= 1, "repump_max_prob in (0,1]");
    }

    // Bulk emitter: calibrated so the default 500 us / 100 nW probe gives a
    // mean of ~110.6 detected counts on resonance and a 33% pass fraction at
    // threshold 100 in the repump-probe-probe loop.
    static EmitterParams snv_a() { return EmitterParams{}; }

    // Waveguide emitter: same optics, much wider repump-induced spectral
    // diffusion; used for the frequency-steering experiments.
    static EmitterParams snv_b() {
        EmitterParams p;
        p.inhomogeneous_sigma_mhz = 60.0;
        return p;
    }

    static EmitterParams preset(const std::string& name) {
        if (name == "snv_a") return snv_a();
        if (name == "snv_b") return snv_b();
        throw std::invalid_argument("unknown emitter preset: " + name);
    }
};

enum class Charge : std::uint8_t { Bright, Dark };

// Two-level density matrix stored as (rho_ee, rho_ge); rho_gg = 1 - rho_ee,
// so the trace is exactly one by construction.
struct DensityMatrix {
    double ee = 0.0;
    std::complex<double> ge{0.0, 0.0};

    double gg() const { return 1.0 - ee; }
    double trace() const { return 1.0; }
    // positivity defect: negative values mean |coherence| exceeds the
    // population bound
    double positivity_margin() const { return ee * gg() - std::norm(ge); }
};

struct EmitterState {
    Charge charge = Charge::Bright;
    double center_detuning_mhz = 0.0;  // current transition center minus nominal
    DensityMatrix rho{};

    static EmitterState bright(double center_mhz = 0.0) {
        return EmitterState{Charge::Bright, center_mhz, DensityMatrix{}};
    }
    static EmitterState dark() {
        return EmitterState{Charge::Dark, 0.0, DensityMatrix{}};
    }
};

// A drive pulse. laser_offset_mhz is the laser frequency relative to the
// nominal center; the effective detuning seen by the emitter is
// laser_offset - state.center_detuning.
struct DriveField {
    double laser_offset_mhz = 0.0;
    double power_nw = 0.0;
    double rabi_mhz = 0.0;  // Omega/2pi, fixed by the power mapping below
    double phase_rad = 0.0;
    double duration_ns = 0.0;

    double rabi_rad_per_ns() const { return kTwoPi * rabi_mhz * 1e-3; }

    // cw probe path: Rabi frequency from the probe saturation power
    static DriveField cw(const EmitterParams& p, double power_nw, double laser_offset_mhz) {
        DriveField d;
        d.laser_offset_mhz = laser_offset_mhz;
        d.power_nw = power_nw;
        d.rabi_mhz = p.natural_linewidth_mhz * std::sqrt(power_nw / p.saturation_power_nw / 2.0);
        return d;
    }

    // ns pulse path (EOM chain): same mapping against the pulse saturation power
    static DriveField pulse(const EmitterParams& p, double power_nw, double laser_offset_mhz,
                            double phase_rad, double duration_ns) {
        DriveField d;
        d.laser_offset_mhz = laser_offset_mhz;
        d.power_nw = power_nw;
        d.rabi_mhz =
            p.natural_linewidth_mhz * std::sqrt(power_nw / p.pulse_saturation_power_nw / 2.0);
        d.phase_rad = phase_rad;
        d.duration_ns = duration_ns;
        return d;
    }

    double detuning_from(const EmitterState& s) const {
        return laser_offset_mhz - s.center_detuning_mhz;
    }
};

// Steady-state emitted photon rate (photons/s) of the driven transition:
//   R(delta, s) = (Gamma/2) * s / (1 + s + (2*delta/gamma_fwhm)^2)
double scattering_rate(double delta_mhz, double s, const EmitterParams& params);

// Detected counts in a window: Poisson with mean
// (rate * detection_efficiency + dark_count_rate) * duration.
std::int64_t sample_counts(double emitted_rate_per_s, double duration_us,
                           const EmitterParams& params, RngStream& rng);

struct ProbeResult {
    std::int64_t counts = 0;         // signal_counts + dark_counts
    std::int64_t signal_counts = 0;  // emitted before any ionization jump
    std::int64_t dark_counts = 0;    // detector background over the full window
    std::optional<double> ion_time_us;  // set iff the emitter ionized in this window
};

// One resonant probe window. Ionization is a jump process with rate
// ionization_yield * emitted rate; signal counts accumulate only up to the
// jump, dark counts over the whole window. The center detuning never moves
// inside a window (spectral stability up to ionization).
ProbeResult probe_with_ionization(EmitterState& state, const DriveField& drive,
                                  double duration_us, const EmitterParams& params,
                                  RngStream& rng);

// Off-resonant repump pulse with dose = power * duration (uW*us). With
// activation probability 1 - exp(-dose/scale) the pulse rescrambles the
// charge environment: the outcome is then an independent draw -- Bright
// with probability repump_max_prob (with a freshly sampled center), Dark
// otherwise. Without activation the state is untouched, so dose = 0 is the
// identity. The independent redraw is what makes the post-repump state
// uncorrelated with the pre-repump state at saturating dose.
void repump_apply(EmitterState& state, double dose_uw_us, const EmitterParams& params,
                  RngStream& rng);

// New transition center after a repump-induced spectral jump: Normal(0, sigma).
double spectral_jump_sample(const EmitterParams& params, RngStream& rng);

}  // namespace snvsim
