#include "snvsim/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "snvsim/bloch.hpp"

namespace snvsim {

double FitResult::param(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return params[i];
    throw std::invalid_argument("FitResult: no parameter named " + name);
}

double FitResult::stderr_of(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return stderrs[i];
    throw std::invalid_argument("FitResult: no parameter named " + name);
}

namespace {

void clamp_to_bounds(std::vector<double>& p, const FitOptions& opts) {
    for (size_t i = 0; i < p.size(); ++i) {
        if (!opts.lower.empty()) p[i] = std::max(p[i], opts.lower[i]);
        if (!opts.upper.empty()) p[i] = std::min(p[i], opts.upper[i]);
    }
}

double objective(const ModelFn& model, const std::vector<double>& xs,
                 const std::vector<double>& ys, const std::vector<double>& w,
                 const std::vector<double>& p, Eigen::VectorXd* resid = nullptr) {
    double sum = 0.0;
    if (resid) resid->resize(Eigen::Index(xs.size()));
    for (size_t i = 0; i < xs.size(); ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        const double r = std::sqrt(wi) * (ys[i] - model(xs[i], p));
        if (resid) (*resid)(Eigen::Index(i)) = r;
        sum += r * r;
    }
    return sum;
}

}  // namespace

FitResult fit_least_squares(const ModelFn& model, const std::vector<double>& xs,
                            const std::vector<double>& ys, const std::vector<double>& weights,
                            std::vector<double> init, const FitOptions& opts,
                            const std::vector<std::string>& names) {
    const size_t n = xs.size(), m = init.size();
    if (n != ys.size()) throw std::invalid_argument("fit: xs and ys size mismatch");
    if (n < m + 1) throw std::invalid_argument("fit: need at least arity+1 points");
    for (double v : xs)
        if (!std::isfinite(v)) throw std::invalid_argument("fit: non-finite x");
    for (double v : ys)
        if (!std::isfinite(v)) throw std::invalid_argument("fit: non-finite y");

    FitResult out;
    out.names = names.empty() ? std::vector<std::string>(m, "") : names;
    clamp_to_bounds(init, opts);

    Eigen::VectorXd resid;
    double chi2 = objective(model, xs, ys, weights, init, &resid);
    std::vector<double> p = init;
    double lambda = 1e-3;
    bool converged = false;
    int iter = 0;

    Eigen::MatrixXd jac(n, m);
    for (; iter < opts.max_iter; ++iter) {
        // central-difference Jacobian of the weighted residuals
        for (size_t j = 0; j < m; ++j) {
            const double h = std::max(1e-7, 1e-7 * std::abs(p[j]));
            std::vector<double> pp = p, pm = p;
            pp[j] += h;
            pm[j] -= h;
            for (size_t i = 0; i < n; ++i) {
                const double wi = weights.empty() ? 1.0 : weights[i];
                jac(Eigen::Index(i), Eigen::Index(j)) =
                    std::sqrt(wi) * (model(xs[i], pp) - model(xs[i], pm)) / (2.0 * h);
            }
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd g = jac.transpose() * resid;  // gradient of -chi2/2
        if (g.norm() < opts.gtol) {
            converged = true;
            break;
        }

        bool stepped = false;
        for (int tries = 0; tries < 16; ++tries) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
            const Eigen::VectorXd step = a.ldlt().solve(g);
            std::vector<double> trial = p;
            for (size_t j = 0; j < m; ++j) trial[j] += step(Eigen::Index(j));
            clamp_to_bounds(trial, opts);
            Eigen::VectorXd trial_resid;
            const double trial_chi2 = objective(model, xs, ys, weights, trial, &trial_resid);
            if (std::isfinite(trial_chi2) && trial_chi2 <= chi2) {
                const double rel = (chi2 - trial_chi2) / std::max(chi2, 1e-300);
                p = trial;
                resid = trial_resid;
                chi2 = trial_chi2;
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                if (rel < opts.ftol) converged = true;
                break;
            }
            lambda *= 8.0;
        }
        if (converged) break;
        if (!stepped) break;  // stalled: report best point, converged stays false
    }

    out.params = p;
    out.converged = converged;
    out.n_iter = iter + 1;
    out.residual_norm = std::sqrt(chi2);

    // parameter errors from (J^T J)^-1 scaled by the reduced chi-square
    out.stderrs.assign(m, 0.0);
    for (size_t j = 0; j < m; ++j) {
        const double h = std::max(1e-7, 1e-7 * std::abs(p[j]));
        std::vector<double> pp = p, pm = p;
        pp[j] += h;
        pm[j] -= h;
        for (size_t i = 0; i < n; ++i) {
            const double wi = weights.empty() ? 1.0 : weights[i];
            jac(Eigen::Index(i), Eigen::Index(j)) =
                std::sqrt(wi) * (model(xs[i], pp) - model(xs[i], pm)) / (2.0 * h);
        }
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const double dof_scale = n > m ? chi2 / double(n - m) : 1.0;
    const Eigen::MatrixXd cov =
        jtj.completeOrthogonalDecomposition().pseudoInverse() * dof_scale;
    for (size_t j = 0; j < m; ++j) {
        const double v = cov(Eigen::Index(j), Eigen::Index(j));
        out.stderrs[j] = v > 0 ? std::sqrt(v) : 0.0;
    }
    return out;
}

FitResult fit_lorentzian_peak(const std::vector<double>& xs, const std::vector<double>& ys,
                              std::optional<double> window_mhz) {
    if (xs.size() < 5) throw std::invalid_argument("fit_lorentzian_peak: too few points");

    // seed: argmax and second moment above the baseline
    size_t imax = 0;
    double base = *std::min_element(ys.begin(), ys.end());
    for (size_t i = 1; i < ys.size(); ++i)
        if (ys[i] > ys[imax]) imax = i;
    const double x0 = xs[imax];

    if (ys[imax] - base < 1e-12 * std::max(std::abs(base), 1.0) + 1e-12) {
        // featureless row: nothing to fit, flag instead of guessing
        FitResult out;
        out.names = {"amplitude", "center", "fwhm", "offset"};
        out.params = {0.0, x0, 0.0, base};
        out.stderrs.assign(4, 0.0);
        out.converged = false;
        return out;
    }

    std::vector<double> fx, fy;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (!window_mhz || std::abs(xs[i] - x0) <= *window_mhz) {
            fx.push_back(xs[i]);
            fy.push_back(ys[i]);
        }
    }

    double wsum = 0, m2 = 0;
    for (size_t i = 0; i < fx.size(); ++i) {
        const double e = std::max(fy[i] - base, 0.0);
        wsum += e;
        m2 += e * (fx[i] - x0) * (fx[i] - x0);
    }
    const double width0 = wsum > 0 ? std::max(2.0 * std::sqrt(m2 / wsum), 1.0) : 10.0;

    const ModelFn model = [](double x, const std::vector<double>& p) {
        const double hw = 0.5 * p[2];
        return p[0] * hw * hw / ((x - p[1]) * (x - p[1]) + hw * hw) + p[3];
    };
    std::vector<double> w(fy.size());
    for (size_t i = 0; i < fy.size(); ++i) w[i] = 1.0 / std::max(fy[i], 1.0);
    FitOptions opts;
    opts.lower = {0.0, -1e9, 1e-3, -1e9};
    opts.upper = {1e12, 1e9, 1e6, 1e12};
    return fit_least_squares(model, fx, fy, w,
                             {std::max(ys[imax] - base, 1e-6), x0, width0, base}, opts,
                             {"amplitude", "center", "fwhm", "offset"});
}

namespace {

// dominant oscillation frequency by a coarse scan of the periodogram
double dominant_frequency(const std::vector<double>& ts, const std::vector<double>& ys) {
    const double span = ts.back() - ts.front();
    if (span <= 0) return 0.0;
    const double mean = std::accumulate(ys.begin(), ys.end(), 0.0) / double(ys.size());
    double best_f = 0.0, best_p = -1.0;
    const double f_min = 0.5 / span;
    double dt_min = span;
    for (size_t i = 1; i < ts.size(); ++i) dt_min = std::min(dt_min, ts[i] - ts[i - 1]);
    const double f_max = 0.5 / std::max(dt_min, 1e-12);
    for (double f = f_min; f <= f_max; f += 0.25 / span) {
        double re = 0, im = 0;
        for (size_t i = 0; i < ts.size(); ++i) {
            const double a = 2.0 * M_PI * f * ts[i];
            re += (ys[i] - mean) * std::cos(a);
            im += (ys[i] - mean) * std::sin(a);
        }
        const double p = re * re + im * im;
        if (p > best_p) {
            best_p = p;
            best_f = f;
        }
    }
    return best_f;
}

}  // namespace

FitResult fit_damped_sine(const std::vector<double>& ts, const std::vector<double>& ys) {
    if (ts.size() < 6) throw std::invalid_argument("fit_damped_sine: too few points");
    const double span = ts.back() - ts.front();
    const double f0 = dominant_frequency(ts, ys);

    FitResult out;
    if (f0 * span < 1.0) {  // less than one visible period: flag, do not guess
        out.names = {"amplitude", "t_decay", "freq", "phase", "offset"};
        out.params = {0, 0, f0, 0, 0};
        out.stderrs.assign(5, 0.0);
        out.converged = false;
        return out;
    }

    const double mean = std::accumulate(ys.begin(), ys.end(), 0.0) / double(ys.size());
    double amp0 = 0.0;
    for (double y : ys) amp0 = std::max(amp0, std::abs(y - mean));

    const ModelFn model = [](double t, const std::vector<double>& p) {
        return p[0] * std::exp(-t / p[1]) * std::sin(2.0 * M_PI * p[2] * t + p[3]) + p[4];
    };
    FitOptions opts;
    opts.lower = {0.0, 1e-3, 1e-9, -10.0, -1e12};
    opts.upper = {1e12, 1e9, 1e9, 10.0, 1e12};

    // phase is the one seed the periodogram does not give; try a few
    FitResult best;
    double best_chi = std::numeric_limits<double>::infinity();
    for (double ph : {0.0, 1.5708, 3.1416, 4.7124}) {
        FitResult r = fit_least_squares(model, ts, ys, {}, {amp0, span, f0, ph, mean}, opts,
                                        {"amplitude", "t_decay", "freq", "phase", "offset"});
        const double chi = r.residual_norm;
        if (r.converged && chi < best_chi) {
            best_chi = chi;
            best = r;
        }
    }
    if (best.params.empty()) {
        best = fit_least_squares(model, ts, ys, {}, {amp0, span, f0, 0.0, mean}, opts,
                                 {"amplitude", "t_decay", "freq", "phase", "offset"});
        best.converged = false;
    }
    return best;
}

FitResult fit_phase_fringe(const std::vector<double>& phis, const std::vector<double>& ys) {
    std::set<double> distinct(phis.begin(), phis.end());
    if (distinct.size() < 4)
        throw std::invalid_argument("fit_phase_fringe: need >= 4 distinct phases");

    // y = a sin(phi) + b cos(phi) + c, solved exactly
    Eigen::MatrixXd A(phis.size(), 3);
    Eigen::VectorXd y(phis.size());
    for (size_t i = 0; i < phis.size(); ++i) {
        A(Eigen::Index(i), 0) = std::sin(phis[i]);
        A(Eigen::Index(i), 1) = std::cos(phis[i]);
        A(Eigen::Index(i), 2) = 1.0;
        y(Eigen::Index(i)) = ys[i];
    }
    const Eigen::VectorXd sol = A.colPivHouseholderQr().solve(y);
    const double a = sol(0), b = sol(1), c = sol(2);
    const double amp = std::hypot(a, b);
    const double phi0 = std::atan2(b, a);

    const Eigen::VectorXd resid = y - A * sol;
    const double chi2 = resid.squaredNorm();
    const double dof = double(phis.size()) - 3.0;
    const Eigen::MatrixXd cov =
        (A.transpose() * A).inverse() * (dof > 0 ? chi2 / dof : 1.0);
    // var(amp) by first-order propagation from (a, b)
    double var_amp = 0.0, var_phi = 0.0;
    if (amp > 1e-12) {
        const double da = a / amp, db = b / amp;
        var_amp = da * da * cov(0, 0) + db * db * cov(1, 1) + 2 * da * db * cov(0, 1);
        const double pa = -b / (amp * amp), pb = a / (amp * amp);
        var_phi = pa * pa * cov(0, 0) + pb * pb * cov(1, 1) + 2 * pa * pb * cov(0, 1);
    } else {
        var_amp = 0.5 * (cov(0, 0) + cov(1, 1));
        var_phi = 0.0;
    }

    FitResult out;
    out.names = {"amplitude", "phi0", "offset"};
    out.params = {amp, phi0, c};
    out.stderrs = {var_amp > 0 ? std::sqrt(var_amp) : 0.0,
                   var_phi > 0 ? std::sqrt(var_phi) : 0.0,
                   cov(2, 2) > 0 ? std::sqrt(cov(2, 2)) : 0.0};
    out.residual_norm = std::sqrt(chi2);
    out.converged = true;
    out.n_iter = 1;
    return out;
}

FitResult fit_gaussian_envelope(const std::vector<double>& taus, const std::vector<double>& amps,
                                const std::vector<double>& weights, bool with_offset) {
    int n_pos = 0;
    for (double a : amps)
        if (a > 0) ++n_pos;
    if (taus.size() < 3 || n_pos < 3)
        throw std::invalid_argument("fit_gaussian_envelope: need >= 3 tau points with A > 0");

    // log-linear seed over the positive points
    double sx2 = 0, sx4 = 0, sl = 0, sx2l = 0;
    int k = 0;
    for (size_t i = 0; i < taus.size(); ++i) {
        if (amps[i] <= 0) continue;
        const double x2 = taus[i] * taus[i], l = std::log(amps[i]);
        sx2 += x2;
        sx4 += x2 * x2;
        sl += l;
        sx2l += x2 * l;
        ++k;
    }
    const double det = double(k) * sx4 - sx2 * sx2;
    double slope = det != 0 ? (double(k) * sx2l - sx2 * sl) / det : -1e-3;
    double icept = det != 0 ? (sl * sx4 - sx2 * sx2l) / det : std::log(amps[0]);
    if (slope >= 0) slope = -1e-3;
    const double t2_0 = 1.0 / std::sqrt(-slope);
    const double a0 = std::exp(icept);

    if (with_offset) {
        const ModelFn model = [](double t, const std::vector<double>& p) {
            return p[0] * std::exp(-(t / p[1]) * (t / p[1])) + p[2];
        };
        FitOptions opts;
        opts.lower = {0.0, 1e-3, -1e12};
        opts.upper = {1e12, 1e9, 1e12};
        return fit_least_squares(model, taus, amps, weights, {a0, t2_0, 0.0}, opts,
                                 {"a0", "t2_star", "offset"});
    }
    const ModelFn model = [](double t, const std::vector<double>& p) {
        return p[0] * std::exp(-(t / p[1]) * (t / p[1]));
    };
    FitOptions opts;
    opts.lower = {0.0, 1e-3};
    opts.upper = {1e12, 1e9};
    return fit_least_squares(model, taus, amps, weights, {a0, t2_0}, opts, {"a0", "t2_star"});
}

FitResult fit_g2(const std::vector<double>& taus, const std::vector<double>& ys) {
    if (taus.size() < 8) throw std::invalid_argument("fit_g2: too few points");
    const ModelFn model = [](double t, const std::vector<double>& p) {
        return p[2] + (1.0 - p[2]) * g2_analytic(std::abs(t), p[0], p[1]);
    };
    const double f0 = dominant_frequency(taus, ys);
    const double om0 = std::max(2.0 * M_PI * f0, 1e-3);
    FitOptions opts;
    opts.lower = {1e-6, 1e-6, 0.0};
    opts.upper = {10.0, 10.0, 0.99};
    // seed gamma from the lifetime-scale rise of the dip
    return fit_least_squares(model, taus, ys, {}, {0.2, om0, 0.0}, opts,
                             {"gamma", "omega", "floor"});
}

double eval_g2_model(double tau_ns, const FitResult& fit) {
    const double c = fit.param("floor");
    return c + (1.0 - c) * g2_analytic(std::abs(tau_ns), fit.param("gamma"), fit.param("omega"));
}

}  // namespace snvsim
