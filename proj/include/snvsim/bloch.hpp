#pragma once

#include <stdexcept>

#include "snvsim/emitter.hpp"

namespace snvsim {

struct StepSizeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// One fixed RK4 step of the optical Bloch equations in the laser frame.
// Refuses steps with dt * max(Gamma, Omega) > 0.5 (rad); accuracy-driven
// subdivision is bloch_evolve_for's job. Trace is preserved exactly by the
// (rho_ee, rho_ge) representation; Hermiticity by construction.
void bloch_evolve(EmitterState& state, const DriveField& drive, double dt_ns,
                  const EmitterParams& params);

// Evolve for an arbitrary duration by subdividing into steps with
// dt * max(Gamma, Omega, |Delta|) <= 0.05.
void bloch_evolve_for(EmitterState& state, const DriveField& drive, double duration_ns,
                      const EmitterParams& params);

// Instantaneous rotation by `area` about the equatorial axis at angle
// `axis_phase` (ideal fast pulse).
void apply_pulse_ideal(EmitterState& state, double area_rad, double axis_phase_rad);

// Excited-state population after the two-pulse interference sequence
// (pi/2 -- free evolution tau -- pi/2 with relative phase phi), for a
// resonantly prepared emitter detuned by delta from the drive laser:
//   rho_ee = (1 + e^{-Gamma tau/2} cos(2 pi delta tau - phi)) / 2
// With decay disabled the exponential factor is dropped.
double ramsey_excited_population(double tau_ns, double phi_rad, double delta_mhz,
                                 const EmitterParams& params, bool include_decay = true);

// Normalized intensity autocorrelation of the resonantly driven two-level
// emitter:
//   g2(tau) = 1 - e^{-3 tau gamma / 4} (cos(omega tau) + (3 gamma)/(4 omega) sin(omega tau))
// gamma and omega are angular rates in rad/ns.
double g2_analytic(double tau_ns, double gamma_rad_ns, double omega_rad_ns);

// Resonant excited-population transient from the ground state, normalized to
// its steady-state value; equals the bracketed factor of g2_analytic in the
// omega >> gamma limit.
double resonant_transient(double t_ns, double gamma_rad_ns, double omega_rad_ns);

}  // namespace snvsim
