#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "snvsim/bloch.hpp"
#include "snvsim/experiments.hpp"
#include "snvsim/fit.hpp"
#include "snvsim/stats.hpp"

using namespace snvsim;

namespace {

double pearson(const std::vector<PairShot>& shots) {
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    for (const auto& s : shots) pairs.emplace_back(s.c_first, s.c_second);
    const auto cm = correlation_metrics(pairs, 100);
    REQUIRE(cm.pearson_r);
    return *cm.pearson_r;
}

double ion_fraction(const std::vector<PairShot>& shots) {
    std::int64_t n = 0;
    for (const auto& s : shots) n += (s.ion_first || s.ion_second) ? 1 : 0;
    return double(n) / double(shots.size());
}

}  // namespace

TEST_CASE("double probe with zero ionization matches the variance decomposition") {
    EmitterParams p = EmitterParams::snv_a();
    p.ionization_yield = 0.0;
    DoubleProbeConfig cfg;
    cfg.probe_duration_us = 500.0;
    cfg.n_shots = 40000;
    const auto shots = run_double_probe(cfg, p, 81, 4);

    // analytic prediction: r = var(shot mean) / (var(shot mean) + E[shot mean]).
    // stationary mixture: bright with a fresh Normal center w.p. repump_max_prob,
    // dark otherwise (activation resamples the charge each shot).
    const double T = cfg.probe_duration_us * 1e-6;
    const double d0 = p.dark_count_rate_hz * T;
    double e1 = 0, e2 = 0, wsum = 0;
    const double sig = p.inhomogeneous_sigma_mhz;
    for (double c = -6 * sig; c <= 6 * sig; c += sig / 200.0) {
        const double w = std::exp(-0.5 * c * c / (sig * sig));
        const double m =
            scattering_rate(c, p.saturation(cfg.probe_power_nw), p) * p.detection_efficiency * T +
            d0;
        e1 += w * m;
        e2 += w * m * m;
        wsum += w;
    }
    e1 /= wsum;
    e2 /= wsum;
    const double pb = p.repump_max_prob;
    const double mean = pb * e1 + (1 - pb) * d0;
    const double var_mean = pb * e2 + (1 - pb) * d0 * d0 - mean * mean;
    const double r_pred = var_mean / (var_mean + mean);

    const double r_mc = pearson(shots);
    INFO("r_mc ", r_mc, " r_pred ", r_pred);
    CHECK(std::abs(r_mc - r_pred) < 0.02);
    CHECK(ion_fraction(shots) == 0.0);
}

TEST_CASE("double probe: ionization bands grow with power") {
    const EmitterParams p = EmitterParams::snv_a();
    DoubleProbeConfig cfg;
    cfg.probe_duration_us = 500.0;
    cfg.n_shots = 20000;

    cfg.probe_power_nw = 10.0;
    const double low = ion_fraction(run_double_probe(cfg, p, 82, 4));
    cfg.probe_power_nw = 200.0;
    const double high = ion_fraction(run_double_probe(cfg, p, 83, 4));
    INFO("low ", low, " high ", high);
    CHECK(low < 0.01);
    CHECK(high > 0.05);
}

TEST_CASE("pump-probe: zero dose leaves the pair correlated like a plain double probe") {
    const EmitterParams p = EmitterParams::snv_a();
    PumpProbeConfig cfg;
    cfg.probe_duration_us = 500.0;
    cfg.pump_power_uw = 0.0;  // dose 0: the pump is the identity
    cfg.n_shots = 20000;
    const double r = pearson(run_probe_repump_probe(cfg, p, 84, 4));
    CHECK(r > 0.5);
}

TEST_CASE("pump-probe: strong dose decorrelates, weak dose does not") {
    const EmitterParams p = EmitterParams::snv_a();
    PumpProbeConfig cfg;
    cfg.probe_duration_us = 500.0;
    cfg.n_shots = 30000;

    cfg.pump_power_uw = 100.0;
    cfg.pump_duration_us = 500.0;  // 5e4 uW*us
    const auto strong = run_probe_repump_probe(cfg, p, 85, 4);
    CHECK(std::abs(pearson(strong)) < 0.03);

    // recovery: P(C4 >= 20 | C3 < 20) ~= repump_max_prob
    std::int64_t n_lo = 0, n_rec = 0;
    for (const auto& s : strong) {
        if (s.c_first < 20) {
            ++n_lo;
            n_rec += s.c_second >= 20 ? 1 : 0;
        }
    }
    REQUIRE(n_lo > 2000);
    CHECK(double(n_rec) / double(n_lo) == doctest::Approx(0.75).epsilon(0.027));

    // conditional distributions of C4 given low / high C3 agree at strong dose
    std::vector<double> c4_lo, c4_hi;
    for (const auto& s : strong)
        (s.c_first < 20 ? c4_lo : c4_hi).push_back(double(s.c_second));
    CHECK(ks2_pvalue(c4_lo, c4_hi) > 0.01);

    cfg.pump_power_uw = 10.0;
    cfg.pump_duration_us = 50.0;  // 500 uW*us
    const auto weak = run_probe_repump_probe(cfg, p, 86, 4);
    CHECK(pearson(weak) > 0.3);
}

TEST_CASE("ple: an emitter stuck dark gives flat rows at the dark rate") {
    EmitterParams p = EmitterParams::snv_a();
    p.ionization_yield = 1.0;  // first scattered photon ionizes
    PleScanConfig cfg;
    cfg.n_scans = 12;
    cfg.block_size_scans = 64;  // one chain, no fresh block starts
    cfg.policy = RepumpPolicy::None;
    const auto rows = run_ple_scan(cfg, p, 87, 1);
    REQUIRE(rows.size() == 12);
    const double dark_mean = p.dark_count_rate_hz * cfg.dwell_us * 1e-6;
    for (std::size_t i = 2; i < rows.size(); ++i) {
        REQUIRE(rows[i].charge_truth == 1);
        double total = 0;
        for (auto c : rows[i].counts) total += double(c);
        CHECK(total / double(rows[i].counts.size()) < 20 * dark_mean + 0.05);
    }
}

TEST_CASE("ple: rows are spectrally stable while no repump or ionization occurs") {
    EmitterParams p = EmitterParams::snv_a();
    p.ionization_yield = 0.0;
    p.inhomogeneous_sigma_mhz = 30.0;
    PleScanConfig cfg;
    cfg.n_scans = 10;
    cfg.policy = RepumpPolicy::None;
    cfg.block_size_scans = 16;
    const auto rows = run_ple_scan(cfg, p, 88, 1);
    const auto freqs = cfg.frequency_axis();
    std::vector<double> argmax;
    for (const auto& row : rows) {
        const auto it = std::max_element(row.counts.begin(), row.counts.end());
        argmax.push_back(freqs[std::size_t(it - row.counts.begin())]);
        CHECK(row.center_truth_mhz == rows[0].center_truth_mhz);
    }
    // scatter of the argmax around the fixed center stays within the line width
    for (double a : argmax) CHECK(std::abs(a - rows[0].center_truth_mhz) < 31.0);
}

TEST_CASE("ple: conditional-threshold policy repumps after dark scans") {
    const EmitterParams p = EmitterParams::snv_a();
    PleScanConfig cfg;
    cfg.n_scans = 120;
    cfg.policy = RepumpPolicy::ConditionalThreshold;
    cfg.threshold_factor = 0.5;
    cfg.block_size_scans = 200;
    const auto rows = run_ple_scan(cfg, p, 89, 1);

    int flagged = 0, dark_then_flag = 0, dark_rows = 0;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        if (rows[i].charge_truth == 1) {
            ++dark_rows;
            dark_then_flag += rows[i + 1].repumped_before ? 1 : 0;
        }
        flagged += rows[i].repumped_before ? 1 : 0;
    }
    REQUIRE(dark_rows > 3);
    // every dark scan triggers the conditional repump before the next one
    CHECK(dark_then_flag == dark_rows);
}

TEST_CASE("ple: three-regime frequencies match the stationary chain oracle") {
    EmitterParams p = EmitterParams::snv_b();
    PleScanConfig cfg;
    cfg.n_scans = 2000;
    cfg.policy = RepumpPolicy::ConditionalThreshold;
    cfg.threshold_factor = 0.5;
    cfg.block_size_scans = 125;
    const auto rows = run_ple_scan(cfg, p, 90, 4);
    const auto freqs = cfg.frequency_axis();

    // regime of each scan from the recorded state at scan start
    int n_dark = 0, n_on = 0, n_off = 0;
    for (const auto& row : rows) {
        if (row.charge_truth == 1)
            ++n_dark;
        else if (std::abs(row.center_truth_mhz) <= 100.0)
            ++n_on;
        else
            ++n_off;
    }

    // rejection-sampling oracle over the stationary charge-detuning chain:
    // a bright emitter ionizes during the line crossing with the closed-form
    // photon dose; scans flagged dark (truly dark at the start, or ionized
    // early enough to clip the peak) are repumped before the next one
    RngStream rng = derive_stream(91, 0);
    const double dwell_s = cfg.dwell_us * 1e-6;
    auto crossing_dose = [&](double center) {
        double emitted = 0.0;
        for (double f : freqs)
            emitted += scattering_rate(f - center, p.saturation(cfg.probe_power_nw), p) * dwell_s;
        return emitted;
    };
    const double a_act = 1.0 - std::exp(-cfg.repump_power_uw * cfg.repump_duration_us /
                                        p.repump_dose_scale);
    auto repump_kernel = [&](bool& bright, double& center) {
        if (!rng.bernoulli(a_act)) return;
        if (rng.bernoulli(p.repump_max_prob)) {
            bright = true;
            center = spectral_jump_sample(p, rng);
        } else {
            bright = false;
        }
    };
    int o_dark = 0, o_on = 0, o_off = 0;
    bool bright = true;
    double center = spectral_jump_sample(p, rng);
    const int m = 300000;
    for (int i = 0; i < m; ++i) {
        if (!bright) {
            ++o_dark;
            repump_kernel(bright, center);  // flagged dark, conditional repump
            continue;
        }
        if (std::abs(center) <= 100.0)
            ++o_on;
        else
            ++o_off;
        const double dose = crossing_dose(center);
        const double q_ion = 1.0 - std::exp(-p.ionization_yield * dose);
        if (rng.bernoulli(q_ion)) {
            bright = false;
            // jump in the first half of the crossing dose clips the counts,
            // so the scan is flagged and repumped right away
            const double w_early = (1.0 - std::exp(-p.ionization_yield * dose / 2.0)) / q_ion;
            if (rng.bernoulli(w_early)) repump_kernel(bright, center);
        }
    }
    const double n = double(rows.size()), md = double(m);
    INFO("sim dark/on/off ", n_dark / n, " ", n_on / n, " ", n_off / n);
    INFO("oracle          ", o_dark / md, " ", o_on / md, " ", o_off / md);
    CHECK(std::abs(n_dark / n - o_dark / md) < 0.05);
    CHECK(std::abs(n_on / n - o_on / md) < 0.05);
    CHECK(std::abs(n_off / n - o_off / md) < 0.05);
}

TEST_CASE("rabi: zero drive power gives flat traces at dark counts") {
    EmitterParams p = EmitterParams::snv_a();
    RabiConfig cfg;
    cfg.pulse_power_nw = 0.0;
    cfg.n_sequences = 100;
    const RabiTraces tr = run_rabi(cfg, p, 92, 1);
    double total = 0;
    for (const auto& trace : tr.interval_traces)
        for (auto c : trace) total += double(c);
    // dark rate only: 100/s * 30 ns * 500 reps * 100 sequences = 1.5e-1 expected
    CHECK(total < 10.0);
}

TEST_CASE("rabi: single-detuning trace matches the Bloch expectation (chi2/dof < 1.5)") {
    EmitterParams p = EmitterParams::snv_a();
    p.inhomogeneous_sigma_mhz = 0.0;
    p.ionization_yield = 0.0;
    p.dark_count_rate_hz = 0.0;
    p.repump_max_prob = 1.0;  // keep the charge bright for every sequence
    RabiConfig cfg;
    cfg.n_reps = 5000;
    cfg.n_sequences = 20;  // 1e5 repetitions total
    cfg.interval_edges = {1};
    const RabiTraces tr = run_rabi(cfg, p, 93, 1);
    REQUIRE(tr.interval_sequences[1] == 20);

    // expectation from the integrated Bloch trajectory
    DriveField pulse = DriveField::pulse(p, cfg.pulse_power_nw, 0.0, 0.0, cfg.pulse_duration_ns);
    EmitterState st = EmitterState::bright(0.0);
    const int sub = 8;
    double chi2 = 0;
    int dof = 0;
    const double reps_total = double(cfg.n_reps) * 20.0;
    for (std::size_t k = 0; k < tr.t_ns.size(); ++k) {
        double integral = 0;
        for (int u = 0; u < sub; ++u) {
            const double e0 = st.rho.ee;
            bloch_evolve_for(st, pulse, cfg.bin_width_ns / sub, p);
            integral += 0.5 * (e0 + st.rho.ee) * cfg.bin_width_ns / sub;
        }
        const double mean = p.gamma_rad_per_ns() * integral * p.detection_efficiency * reps_total;
        if (mean < 5) continue;
        const double obs = double(tr.interval_traces[1][k]);
        chi2 += (obs - mean) * (obs - mean) / mean;
        ++dof;
    }
    REQUIRE(dof > 50);
    CHECK(chi2 / dof < 1.5);
}

TEST_CASE("rabi: post-selection equals live CRC heralding in distribution") {
    const EmitterParams p = EmitterParams::snv_a();
    RabiConfig post;
    post.probe.c_pass = 105;
    post.probe.c_repump = 10;
    post.interval_edges = {105};
    post.n_sequences = 1500;
    const RabiTraces a = run_rabi(post, p, 94, 4);

    RabiConfig live = post;
    live.live_crc = true;
    const RabiTraces b = run_rabi(live, p, 95, 4);

    std::vector<double> sel, her;
    for (std::size_t i = 0; i < a.readout_totals.size(); ++i)
        if (a.interval_of[i] == 1) sel.push_back(double(a.readout_totals[i]));
    for (std::size_t i = 0; i < b.readout_totals.size(); ++i)
        if (b.probe_counts[i] >= 105) her.push_back(double(b.readout_totals[i]));
    REQUIRE(sel.size() > 200);
    REQUIRE(her.size() > 200);
    CHECK(ks2_pvalue(sel, her) > 0.01);
}

TEST_CASE("ramsey: interferometer extremes and mixed-state normalization") {
    EmitterParams p = EmitterParams::snv_a();
    p.inhomogeneous_sigma_mhz = 0.0;  // heralded exactly on resonance
    p.ionization_yield = 0.0;
    RamseyConfig cfg;
    cfg.crc.c_pass = 0;  // herald immediately
    cfg.crc.c_repump = 0;
    cfg.tau_grid_ns = {0.02};
    cfg.n_phases = 4;
    cfg.n_heralds_per_point = 200;
    cfg.include_decay = false;
    const auto pts = run_ramsey(cfg, p, 96, 2);

    double c_phi0 = 0, c_phipi = 0, c_mixed = 0;
    std::int64_t n0 = 0, npi = 0, nmix = 0;
    for (const auto& pt : pts) {
        const double per_rep = double(pt.counts) / double(pt.n_reps);
        if (pt.mixed_reference) {
            c_mixed += per_rep;
            ++nmix;
        } else if (pt.phi_rad == 0.0) {
            c_phi0 += per_rep;
            ++n0;
        } else if (std::abs(pt.phi_rad - M_PI) < 1e-9) {
            c_phipi += per_rep;
            ++npi;
        }
    }
    REQUIRE(n0 > 0);
    REQUIRE(npi > 0);
    REQUIRE(nmix > 0);
    const double norm = 2.0 * c_mixed / double(nmix);
    CHECK(c_phi0 / double(n0) / norm == doctest::Approx(1.0).epsilon(0.05));    // maximal
    CHECK(c_phipi / double(npi) / norm == doctest::Approx(0.0).epsilon(0.05));  // minimal
}

TEST_CASE("ramsey: ensemble fringe contrast equals the analytic mixture") {
    const EmitterParams p = EmitterParams::snv_b();
    RamseyConfig cfg;
    cfg.crc.c_pass = 110;
    cfg.crc.c_repump = 10;
    cfg.crc.probe_power_nw = 1000.0;
    cfg.tau_grid_ns = {3.0};
    cfg.n_phases = 8;
    cfg.n_heralds_per_point = 1500;
    const auto pts = run_ramsey(cfg, p, 97, 4);

    // per-phase normalized means and the recorded heralded detunings
    std::map<double, std::pair<double, std::int64_t>> by_phi;
    double mixed = 0;
    std::int64_t nmix = 0;
    std::vector<double> detunings;
    for (const auto& pt : pts) {
        const double per_rep = double(pt.counts) / double(pt.n_reps);
        if (pt.mixed_reference) {
            mixed += per_rep;
            ++nmix;
            continue;
        }
        auto& acc = by_phi[pt.phi_rad];
        acc.first += per_rep;
        ++acc.second;
        detunings.push_back(pt.heralded_detuning_mhz);
    }
    const double norm = 2.0 * mixed / double(nmix);
    std::vector<double> phis, ys;
    for (const auto& [phi, acc] : by_phi) {
        phis.push_back(phi);
        ys.push_back(acc.first / double(acc.second) / norm);
    }
    // fringe amplitude from a direct sinusoid projection
    double re = 0, im = 0;
    for (std::size_t i = 0; i < phis.size(); ++i) {
        re += ys[i] * std::cos(phis[i]);
        im += ys[i] * std::sin(phis[i]);
    }
    const double amp = 2.0 * std::hypot(re, im) / double(phis.size());

    // analytic: 0.5 e^{-Gamma tau/2} |E cos(delta tau)| over the heralded sample
    double ec = 0, es = 0;
    for (double d : detunings) {
        ec += std::cos(kTwoPi * d * 1e-3 * 3.0);
        es += std::sin(kTwoPi * d * 1e-3 * 3.0);
    }
    const double mixture = std::hypot(ec, es) / double(detunings.size());
    const double predict = 0.5 * std::exp(-0.5 * p.gamma_rad_per_ns() * 3.0) * mixture;
    INFO("amp ", amp, " predict ", predict);
    CHECK(std::abs(amp - predict) < 0.02);
}

TEST_CASE("g2: antibunched at zero delay, analytic shape, background floor") {
    const EmitterParams p = EmitterParams::snv_a();
    G2Config cfg;
    cfg.power_nw = 800.0;  // underdamped: clear oscillation for the fit
    cfg.duration_s = 0.05;
    const G2Histogram h = run_g2(cfg, p, 98, 4);
    REQUIRE(h.tau_ns.size() == 120);
    CHECK(h.normalized[0] < 0.05);

    std::vector<double> ys(h.normalized.begin(), h.normalized.end());
    const FitResult fit = fit_g2(h.tau_ns, ys);
    REQUIRE(fit.converged);
    const double gamma = p.gamma_rad_per_ns();
    DriveField d = DriveField::cw(p, cfg.power_nw, 0.0);
    const double omega_eff =
        std::sqrt(std::pow(d.rabi_rad_per_ns(), 2) - std::pow(gamma / 4.0, 2));
    CHECK(fit.param("gamma") == doctest::Approx(gamma).epsilon(0.05));
    CHECK(fit.param("omega") == doctest::Approx(omega_eff).epsilon(0.05));
    CHECK(fit.param("floor") < 0.05);
}
