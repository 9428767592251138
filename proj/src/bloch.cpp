#include "snvsim/bloch.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace snvsim {

namespace {

// State vector (rho_ee, Re rho_ge, Im rho_ge); laser frame with detuning
// Delta = omega_L - omega_0 and drive phase phi:
//   d(ee)/dt = -G*ee + W*(x*sin(phi) - y*cos(phi))
//   dx/dt    = -G/2*x - D*y - (W/2)*sin(phi)*(2*ee - 1)
//   dy/dt    =  D*x - G/2*y + (W/2)*cos(phi)*(2*ee - 1)
struct Deriv {
    double gamma, delta, omega, sinp, cosp;

    std::array<double, 3> operator()(const std::array<double, 3>& v) const {
        const double ee = v[0], x = v[1], y = v[2];
        const double inv = 2.0 * ee - 1.0;
        return {-gamma * ee + omega * (x * sinp - y * cosp),
                -0.5 * gamma * x - delta * y - 0.5 * omega * sinp * inv,
                delta * x - 0.5 * gamma * y + 0.5 * omega * cosp * inv};
    }
};

}  // namespace

void bloch_evolve(EmitterState& state, const DriveField& drive, double dt_ns,
                  const EmitterParams& params) {
    if (dt_ns <= 0.0) throw StepSizeError("bloch_evolve: dt must be > 0");
    const double gamma = params.gamma_rad_per_ns();
    const double omega = drive.rabi_rad_per_ns();
    if (dt_ns * std::max(gamma, omega) > 0.5)
        throw StepSizeError("bloch_evolve: dt * max(Gamma, Omega) > 0.5, reduce the step");
    if (state.charge == Charge::Dark) return;  // no optical dynamics in the dark state

    const Deriv f{gamma, kTwoPi * drive.detuning_from(state) * 1e-3, omega,
                  std::sin(drive.phase_rad), std::cos(drive.phase_rad)};
    const std::array<double, 3> v0{state.rho.ee, state.rho.ge.real(), state.rho.ge.imag()};

    auto axpy = [](const std::array<double, 3>& a, double h, const std::array<double, 3>& b) {
        return std::array<double, 3>{a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2]};
    };
    const auto k1 = f(v0);
    const auto k2 = f(axpy(v0, 0.5 * dt_ns, k1));
    const auto k3 = f(axpy(v0, 0.5 * dt_ns, k2));
    const auto k4 = f(axpy(v0, dt_ns, k3));

    state.rho.ee = v0[0] + dt_ns / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    state.rho.ge = {v0[1] + dt_ns / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
                    v0[2] + dt_ns / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])};
}

void bloch_evolve_for(EmitterState& state, const DriveField& drive, double duration_ns,
                      const EmitterParams& params) {
    if (duration_ns <= 0.0) return;
    if (state.charge == Charge::Dark) return;
    const double gamma = params.gamma_rad_per_ns();
    const double omega = drive.rabi_rad_per_ns();
    const double delta = std::abs(kTwoPi * drive.detuning_from(state) * 1e-3);
    const double scale = std::max({gamma, omega, delta, 1e-6});
    const int n = std::max(1, int(std::ceil(duration_ns * scale / 0.05)));
    const double dt = duration_ns / n;
    for (int i = 0; i < n; ++i) bloch_evolve(state, drive, dt, params);
}

void apply_pulse_ideal(EmitterState& state, double area_rad, double axis_phase_rad) {
    if (state.charge == Charge::Dark) return;
    // Bloch vector (u, v, w) = (2 Re ge, 2 Im ge, 2 ee - 1), Rodrigues
    // rotation about the in-plane axis (cos a, sin a, 0).
    const double u = 2.0 * state.rho.ge.real();
    const double v = 2.0 * state.rho.ge.imag();
    const double w = 2.0 * state.rho.ee - 1.0;
    const double nx = std::cos(axis_phase_rad), ny = std::sin(axis_phase_rad);
    const double c = std::cos(area_rad), s = std::sin(area_rad);
    const double ndot = nx * u + ny * v;
    const double ru = u * c + (ny * w) * s + nx * ndot * (1 - c);
    const double rv = v * c + (-nx * w) * s + ny * ndot * (1 - c);
    const double rw = w * c + (nx * v - ny * u) * s;
    state.rho.ee = 0.5 * (1.0 + rw);
    state.rho.ge = {0.5 * ru, 0.5 * rv};
}

double ramsey_excited_population(double tau_ns, double phi_rad, double delta_mhz,
                                 const EmitterParams& params, bool include_decay) {
    const double phase = kTwoPi * delta_mhz * 1e-3 * tau_ns - phi_rad;
    const double damp =
        include_decay ? std::exp(-0.5 * params.gamma_rad_per_ns() * tau_ns) : 1.0;
    return 0.5 * (1.0 + damp * std::cos(phase));
}

double g2_analytic(double tau_ns, double gamma_rad_ns, double omega_rad_ns) {
    if (omega_rad_ns <= 0.0) throw std::invalid_argument("g2_analytic: omega must be > 0");
    if (gamma_rad_ns < 0.0 || tau_ns < 0.0)
        throw std::invalid_argument("g2_analytic: gamma and tau must be >= 0");
    const double damp = std::exp(-0.75 * gamma_rad_ns * tau_ns);
    return 1.0 - damp * (std::cos(omega_rad_ns * tau_ns) +
                         0.75 * gamma_rad_ns / omega_rad_ns * std::sin(omega_rad_ns * tau_ns));
}

double resonant_transient(double t_ns, double gamma_rad_ns, double omega_rad_ns) {
    return g2_analytic(t_ns, gamma_rad_ns, omega_rad_ns);
}

}  // namespace snvsim
