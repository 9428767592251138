#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace snvsim {

struct FitResult {
    std::vector<std::string> names;
    std::vector<double> params;
    std::vector<double> stderrs;  // from the Jacobian normal matrix, chi2/dof scaled
    double residual_norm = 0.0;   // sqrt(sum of weighted squared residuals)
    bool converged = false;
    int n_iter = 0;

    double param(const std::string& name) const;
    double stderr_of(const std::string& name) const;
};

using ModelFn = std::function<double(double x, const std::vector<double>& p)>;

struct FitOptions {
    std::vector<double> lower;  // empty = unbounded
    std::vector<double> upper;
    int max_iter = 200;
    double ftol = 1e-10;  // relative objective change
    double gtol = 1e-8;   // gradient norm
};

// Damped least squares (Levenberg-Marquardt) with a central-difference
// Jacobian. Weights are 1/sigma^2 per point; pass empty for unit weights.
// Degenerate problems return converged = false with the best point found.
FitResult fit_least_squares(const ModelFn& model, const std::vector<double>& xs,
                            const std::vector<double>& ys, const std::vector<double>& weights,
                            std::vector<double> init, const FitOptions& opts = {},
                            const std::vector<std::string>& names = {});

// y = A * (fwhm/2)^2 / ((x - x0)^2 + (fwhm/2)^2) + c
// Seeds from the argmax and second moment; if `window_mhz` is given, only
// points within the window around the seed center are fitted (dominant-peak
// selection when a second line is present).
FitResult fit_lorentzian_peak(const std::vector<double>& xs, const std::vector<double>& ys,
                              std::optional<double> window_mhz = std::nullopt);

// y = A * exp(-t/T) * sin(2 pi f t + phi) + c, f in 1/x-units.
FitResult fit_damped_sine(const std::vector<double>& ts, const std::vector<double>& ys);

// y = A * sin(phi + phi0) + c via exact linear least squares; A >= 0 with the
// sign folded into phi0. Requires >= 4 distinct phases.
FitResult fit_phase_fringe(const std::vector<double>& phis, const std::vector<double>& ys);

// A(tau) = A0 * exp(-(tau/T2)^2), optionally plus a constant offset.
FitResult fit_gaussian_envelope(const std::vector<double>& taus, const std::vector<double>& amps,
                                const std::vector<double>& weights = {},
                                bool with_offset = false);

// g2 histogram model: y = c + (1 - c) * g2_analytic(tau; gamma, omega).
// The floor c is the fitted zero-delay value of the normalized histogram.
FitResult fit_g2(const std::vector<double>& taus, const std::vector<double>& ys);

double eval_g2_model(double tau_ns, const FitResult& fit);

}  // namespace snvsim
