#include "snvsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "snvsim/bloch.hpp"
#include "snvsim/runner.hpp"

namespace snvsim {

namespace {

EmitterState fresh_state(const EmitterParams& params, RngStream& rng) {
    return EmitterState::bright(spectral_jump_sample(params, rng));
}

}  // namespace

// ----------------------------------------------------------------- pairs --

std::vector<PairShot> run_double_probe(const DoubleProbeConfig& cfg, const EmitterParams& params,
                                       std::uint64_t seed, int n_workers) {
    if (cfg.n_shots < 1) throw std::invalid_argument("run_double_probe: n_shots must be >= 1");
    params.validate();
    std::vector<PairShot> shots(std::size_t(cfg.n_shots));
    const std::int64_t n_blocks = (cfg.n_shots + cfg.block_size - 1) / cfg.block_size;
    const double dose = cfg.repump_power_uw * cfg.repump_duration_us;

    run_blocks(n_blocks, n_workers, [&](std::int64_t b) {
        RngStream rng = derive_stream(seed, std::uint64_t(b));
        EmitterState st = fresh_state(params, rng);
        const std::int64_t lo = b * cfg.block_size;
        const std::int64_t hi = std::min<std::int64_t>(lo + cfg.block_size, cfg.n_shots);
        const DriveField probe = DriveField::cw(params, cfg.probe_power_nw, 0.0);
        for (std::int64_t i = lo; i < hi; ++i) {
            repump_apply(st, dose, params, rng);
            PairShot& s = shots[std::size_t(i)];
            s.charge_before = st.charge == Charge::Dark ? 1 : 0;
            s.center_before_mhz = st.center_detuning_mhz;
            const ProbeResult p1 = probe_with_ionization(st, probe, cfg.probe_duration_us,
                                                         params, rng);
            const ProbeResult p2 = probe_with_ionization(st, probe, cfg.probe_duration_us,
                                                         params, rng);
            s.c_first = std::int32_t(p1.counts);
            s.c_second = std::int32_t(p2.counts);
            s.ion_first = p1.ion_time_us.has_value();
            s.ion_second = p2.ion_time_us.has_value();
        }
    });
    return shots;
}

std::vector<PairShot> run_probe_repump_probe(const PumpProbeConfig& cfg,
                                             const EmitterParams& params, std::uint64_t seed,
                                             int n_workers) {
    if (cfg.n_shots < 1) throw std::invalid_argument("run_probe_repump_probe: n_shots >= 1");
    params.validate();
    std::vector<PairShot> shots(std::size_t(cfg.n_shots));
    const std::int64_t n_blocks = (cfg.n_shots + cfg.block_size - 1) / cfg.block_size;
    const double dose = cfg.pump_power_uw * cfg.pump_duration_us;

    run_blocks(n_blocks, n_workers, [&](std::int64_t b) {
        RngStream rng = derive_stream(seed, std::uint64_t(b));
        EmitterState st = fresh_state(params, rng);
        const std::int64_t lo = b * cfg.block_size;
        const std::int64_t hi = std::min<std::int64_t>(lo + cfg.block_size, cfg.n_shots);
        const DriveField probe = DriveField::cw(params, cfg.probe_power_nw, 0.0);
        for (std::int64_t i = lo; i < hi; ++i) {
            PairShot& s = shots[std::size_t(i)];
            s.charge_before = st.charge == Charge::Dark ? 1 : 0;
            s.center_before_mhz = st.center_detuning_mhz;
            const ProbeResult p3 = probe_with_ionization(st, probe, cfg.probe_duration_us,
                                                         params, rng);
            repump_apply(st, dose, params, rng);
            const ProbeResult p4 = probe_with_ionization(st, probe, cfg.probe_duration_us,
                                                         params, rng);
            s.c_first = std::int32_t(p3.counts);
            s.c_second = std::int32_t(p4.counts);
            s.ion_first = p3.ion_time_us.has_value();
            s.ion_second = p4.ion_time_us.has_value();
        }
    });
    return shots;
}

// ------------------------------------------------------------------- PLE --

int PleScanConfig::n_steps() const {
    return int(std::ceil((f_end_mhz - f_start_mhz) / step_mhz()));
}

std::vector<double> PleScanConfig::frequency_axis() const {
    std::vector<double> f(static_cast<std::size_t>(n_steps()));
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = f_start_mhz + double(k) * step_mhz();
    return f;
}

void PleScanConfig::validate() const {
    if (!(f_start_mhz < f_end_mhz))
        throw std::invalid_argument("PleScanConfig: f_start must be < f_end");
    if (!(scan_rate_ghz_per_s > 0))
        throw std::invalid_argument("PleScanConfig: scan_rate must be > 0");
    if (!(dwell_us > 0)) throw std::invalid_argument("PleScanConfig: dwell must be > 0");
    if (!(threshold_factor > 0))
        throw std::invalid_argument("PleScanConfig: threshold_factor must be > 0");
    if (n_scans < 1) throw std::invalid_argument("PleScanConfig: n_scans must be >= 1");
    if (n_steps() < 1) throw std::invalid_argument("PleScanConfig: scan resolves zero steps");
    if (policy == RepumpPolicy::CrcBeforeScan) crc.validate();
}

std::vector<PleRow> run_ple_scan(const PleScanConfig& cfg, const EmitterParams& params,
                                 std::uint64_t seed, int n_workers) {
    cfg.validate();
    params.validate();
    const auto freqs = cfg.frequency_axis();
    std::vector<PleRow> rows(std::size_t(cfg.n_scans));
    const std::int64_t n_blocks =
        (cfg.n_scans + cfg.block_size_scans - 1) / cfg.block_size_scans;
    const double cond_dose = cfg.repump_power_uw * cfg.repump_duration_us;

    // a row maximum this small is consistent with detector background alone
    // (tail probability over all steps below 1%), so such rows always flag
    // the emitter as dark regardless of the running bright reference
    const double lam_dark = params.dark_count_rate_hz * cfg.dwell_us * 1e-6;
    std::int64_t dark_floor = 0;
    {
        double pmf = std::exp(-lam_dark), tail = 1.0 - pmf;
        while (double(cfg.n_steps()) * tail >= 0.01 && dark_floor < 1000) {
            ++dark_floor;
            pmf *= lam_dark / double(dark_floor);
            tail -= pmf;
        }
        ++dark_floor;  // first count value above the bound
    }

    run_blocks(n_blocks, n_workers, [&](std::int64_t b) {
        RngStream rng = derive_stream(seed, std::uint64_t(b));
        EmitterState st = fresh_state(params, rng);
        std::vector<double> prior_maxima;
        bool repump_pending = false;

        const int lo = int(b) * cfg.block_size_scans;
        const int hi = std::min(lo + cfg.block_size_scans, cfg.n_scans);
        for (int scan = lo; scan < hi; ++scan) {
            PleRow& row = rows[std::size_t(scan)];
            row.scan = scan;

            if (cfg.policy == RepumpPolicy::ConditionalThreshold && repump_pending) {
                repump_apply(st, cond_dose, params, rng);
                row.repumped_before = true;
                repump_pending = false;
            }
            if (cfg.policy == RepumpPolicy::CrcBeforeScan) {
                const CrcOutcome out = crc_run(st, cfg.crc, params, rng);
                row.crc_heralded = out.heralded;
                row.crc_attempts = out.attempts;
                row.crc_repumps = out.repumps;
                row.crc_counts = out.final_counts;
            }

            row.center_truth_mhz = st.center_detuning_mhz;
            row.charge_truth = st.charge == Charge::Dark ? 1 : 0;
            row.counts.resize(freqs.size());

            for (std::size_t k = 0; k < freqs.size(); ++k) {
                const DriveField step_drive = DriveField::cw(params, cfg.probe_power_nw, freqs[k]);
                const ProbeResult pr =
                    probe_with_ionization(st, step_drive, cfg.dwell_us, params, rng);
                std::int64_t c = pr.counts;
                if (cfg.second_emitter) {
                    const double r2 = cfg.second_emitter->relative_strength *
                                      scattering_rate(freqs[k] - cfg.second_emitter->offset_mhz,
                                                      params.saturation(cfg.probe_power_nw),
                                                      params);
                    c += rng.poisson(r2 * params.detection_efficiency * cfg.dwell_us * 1e-6);
                }
                row.counts[k] = std::int32_t(c);
            }

            if (cfg.policy == RepumpPolicy::ConditionalThreshold) {
                const double row_max =
                    double(*std::max_element(row.counts.begin(), row.counts.end()));
                if (!prior_maxima.empty()) {
                    double mean = 0;
                    for (double m : prior_maxima) mean += m;
                    mean /= double(prior_maxima.size());
                    repump_pending = row_max < cfg.threshold_factor * mean;
                }
                // flagged rows stay out of the running mean: it references the
                // typical bright peak level, and folding dark maxima in would
                // let a dark streak drag the threshold below the dark level
                if (!repump_pending || prior_maxima.empty()) prior_maxima.push_back(row_max);
            }
        }
    });
    return rows;
}

// ------------------------------------------------------------------ Rabi --

RabiTraces run_rabi(const RabiConfig& cfg, const EmitterParams& params, std::uint64_t seed,
                    int n_workers) {
    params.validate();
    cfg.probe.validate();
    if (cfg.pulse_duration_ns <= 0 || cfg.bin_width_ns <= 0)
        throw std::invalid_argument("run_rabi: pulse duration and bin width must be > 0");
    const double nbins_f = cfg.pulse_duration_ns / cfg.bin_width_ns;
    if (std::abs(nbins_f - std::round(nbins_f)) > 1e-9)
        throw std::invalid_argument("run_rabi: bin width must divide the pulse duration");
    const int n_bins = int(std::llround(nbins_f));
    const std::size_t n_intervals = cfg.interval_edges.size() + 1;

    RabiTraces out;
    out.t_ns.resize(std::size_t(n_bins));
    for (int i = 0; i < n_bins; ++i) out.t_ns[std::size_t(i)] = (i + 0.5) * cfg.bin_width_ns;
    out.probe_counts.assign(std::size_t(cfg.n_sequences), 0);
    out.interval_of.assign(std::size_t(cfg.n_sequences), 0);
    out.readout_totals.assign(std::size_t(cfg.n_sequences), 0);

    // per-sequence bin means are deterministic given the detuning, so the
    // Bloch trace is integrated once per sequence and the counts drawn from
    // the rep-summed mean
    struct BlockAccum {
        std::vector<std::vector<std::int64_t>> traces;
        std::vector<std::int64_t> seqs;
    };
    const std::int64_t n_blocks = (cfg.n_sequences + cfg.block_size - 1) / cfg.block_size;
    std::vector<BlockAccum> accum(static_cast<std::size_t>(n_blocks));

    const double dose = cfg.probe.repump_dose_uw_us();
    const double gamma_ns = params.gamma_rad_per_ns();

    run_blocks(n_blocks, n_workers, [&](std::int64_t b) {
        RngStream rng = derive_stream(seed, std::uint64_t(b));
        EmitterState st = fresh_state(params, rng);
        BlockAccum& acc = accum[std::size_t(b)];
        acc.traces.assign(n_intervals, std::vector<std::int64_t>(std::size_t(n_bins), 0));
        acc.seqs.assign(n_intervals, 0);

        std::vector<double> bin_integral(static_cast<std::size_t>(n_bins));  // integral of rho_ee dt per bin
        const std::int64_t lo = b * cfg.block_size;
        const std::int64_t hi = std::min<std::int64_t>(lo + cfg.block_size, cfg.n_sequences);
        for (std::int64_t i = lo; i < hi; ++i) {
            std::int64_t probe_counts = 0;
            if (cfg.live_crc) {
                const CrcOutcome oc = crc_run(st, cfg.probe, params, rng);
                probe_counts = oc.final_counts;
            } else {
                repump_apply(st, dose, params, rng);
                const DriveField probe = DriveField::cw(params, cfg.probe.probe_power_nw,
                                                        cfg.probe.probe_laser_offset_mhz);
                probe_counts =
                    probe_with_ionization(st, probe, cfg.probe.probe_duration_us, params, rng)
                        .counts;
            }
            out.probe_counts[std::size_t(i)] = probe_counts;

            int interval = 0;
            while (interval < int(cfg.interval_edges.size()) &&
                   probe_counts >= cfg.interval_edges[std::size_t(interval)])
                ++interval;
            out.interval_of[std::size_t(i)] = interval;

            // deterministic trace for this sequence's detuning
            double emitted_per_rep = 0.0;
            if (st.charge == Charge::Bright) {
                DriveField pulse = DriveField::pulse(params, cfg.pulse_power_nw,
                                                     cfg.probe.probe_laser_offset_mhz, 0.0,
                                                     cfg.pulse_duration_ns);
                EmitterState trace_state = st;
                trace_state.rho = DensityMatrix{};  // rep starts from the ground state
                const int sub = 8;
                const double dt = cfg.bin_width_ns / sub;
                for (int k = 0; k < n_bins; ++k) {
                    double integral = 0.0;
                    for (int u = 0; u < sub; ++u) {
                        const double e0 = trace_state.rho.ee;
                        bloch_evolve_for(trace_state, pulse, dt, params);
                        integral += 0.5 * (e0 + trace_state.rho.ee) * dt;
                    }
                    bin_integral[std::size_t(k)] = integral;
                    emitted_per_rep += gamma_ns * integral;
                }
            } else {
                std::fill(bin_integral.begin(), bin_integral.end(), 0.0);
            }

            // ionization inside the rep train: the scattered-photon budget
            // decides after how many reps the emitter goes dark
            std::int64_t live_reps = cfg.n_reps;
            if (st.charge == Charge::Bright && params.ionization_yield > 0 &&
                emitted_per_rep > 0) {
                const double p_rep = -std::expm1(-params.ionization_yield * emitted_per_rep);
                const double u = rng.uniform();
                if (u < 1.0 - std::pow(1.0 - p_rep, double(cfg.n_reps))) {
                    live_reps = std::int64_t(std::log1p(-u) / std::log1p(-p_rep)) + 1;
                    live_reps = std::min<std::int64_t>(live_reps, cfg.n_reps);
                    st.charge = Charge::Dark;
                }
            }

            const double dark_per_bin =
                params.dark_count_rate_hz * cfg.bin_width_ns * 1e-9 * double(cfg.n_reps);
            std::int64_t total = 0;
            auto& trace = acc.traces[std::size_t(interval)];
            for (int k = 0; k < n_bins; ++k) {
                const double mean = gamma_ns * bin_integral[std::size_t(k)] *
                                        params.detection_efficiency * double(live_reps) +
                                    dark_per_bin;
                const std::int64_t c = rng.poisson(mean);
                trace[std::size_t(k)] += c;
                total += c;
            }
            out.readout_totals[std::size_t(i)] = total;
            ++acc.seqs[std::size_t(interval)];
        }
    });

    out.interval_traces.assign(n_intervals, std::vector<std::int64_t>(std::size_t(n_bins), 0));
    out.interval_sequences.assign(n_intervals, 0);
    for (const auto& acc : accum) {
        for (std::size_t iv = 0; iv < n_intervals; ++iv) {
            out.interval_sequences[iv] += acc.seqs[iv];
            for (int k = 0; k < n_bins; ++k)
                out.interval_traces[iv][std::size_t(k)] += acc.traces[iv][std::size_t(k)];
        }
    }
    return out;
}

// ---------------------------------------------------------------- Ramsey --

std::vector<double> RamseyConfig::default_grid() {
    std::vector<double> taus;
    for (double t = 0.5; t <= 12.0 + 1e-9; t += 0.5) taus.push_back(t);
    return taus;
}

namespace {

double ramsey_population_finite_pulses(const RamseyConfig& cfg, const EmitterParams& params,
                                       double tau_ns, double phi, double delta_mhz) {
    // Bloch-evolved pi/2 pulses of finite duration
    EmitterState st = EmitterState::bright(0.0);
    EmitterParams p = params;
    if (!cfg.include_decay) p.natural_linewidth_mhz = 1e-9;
    DriveField pulse = DriveField::pulse(p, 1.0, delta_mhz + 0.0, 0.0, 0.0);
    pulse.rabi_mhz = cfg.pulse_rabi_mhz;  // pulse calibrated directly by Rabi frequency
    pulse.laser_offset_mhz = delta_mhz;
    const double t_half_pi = 0.25 / (cfg.pulse_rabi_mhz * 1e-3);  // quarter period
    bloch_evolve_for(st, pulse, t_half_pi, p);
    // free evolution
    const double g = p.gamma_rad_per_ns();
    const double damp = std::exp(-0.5 * g * tau_ns);
    const std::complex<double> rot =
        std::polar(damp, kTwoPi * delta_mhz * 1e-3 * tau_ns);
    st.rho.ge *= rot;
    st.rho.ee *= std::exp(-g * tau_ns);
    DriveField pulse2 = pulse;
    pulse2.phase_rad = phi;
    bloch_evolve_for(st, pulse2, t_half_pi, p);
    return st.rho.ee;
}

}  // namespace

std::vector<RamseyPoint> run_ramsey(const RamseyConfig& cfg, const EmitterParams& params,
                                    std::uint64_t seed, int n_workers) {
    params.validate();
    cfg.crc.validate();
    if (cfg.n_phases < 4)
        throw std::invalid_argument("run_ramsey: need >= 4 phases for the fringe fits");
    std::vector<double> taus = cfg.tau_grid_ns.empty() ? RamseyConfig::default_grid()
                                                       : cfg.tau_grid_ns;

    // point list: all (tau, phi) plus one mixed-state reference per phase
    struct PointSpec {
        double tau, phi;
        bool mixed;
    };
    std::vector<PointSpec> spec;
    for (double tau : taus)
        for (int ip = 0; ip < cfg.n_phases; ++ip)
            spec.push_back({tau, kTwoPi * ip / cfg.n_phases, false});
    for (int ip = 0; ip < cfg.n_phases; ++ip)
        spec.push_back({cfg.mixed_tau_ns, kTwoPi * ip / cfg.n_phases, true});

    std::vector<RamseyPoint> points(spec.size() * std::size_t(cfg.n_heralds_per_point));
    const double window_factor =
        cfg.include_decay ? -std::expm1(-params.gamma_rad_per_ns() * cfg.readout_window_ns)
                          : params.gamma_rad_per_ns() * cfg.readout_window_ns;
    const double dark_mean =
        params.dark_count_rate_hz * cfg.readout_window_ns * 1e-9;

    run_blocks(std::int64_t(spec.size()), n_workers, [&](std::int64_t b) {
        RngStream rng = derive_stream(seed, std::uint64_t(b));
        EmitterState st = fresh_state(params, rng);
        const PointSpec ps = spec[std::size_t(b)];
        for (std::int64_t h = 0; h < cfg.n_heralds_per_point; ++h) {
            RamseyPoint& pt = points[std::size_t(b) * std::size_t(cfg.n_heralds_per_point) +
                                     std::size_t(h)];
            pt.tau_ns = ps.tau;
            pt.phi_rad = ps.phi;
            pt.mixed_reference = ps.mixed;

            const CrcOutcome oc = crc_run(st, cfg.crc, params, rng);
            pt.crc_attempts = oc.attempts;
            pt.crc_final_counts = oc.final_counts;
            pt.heralded_detuning_mhz = oc.heralded_detuning_mhz;
            pt.n_reps = cfg.n_reps_per_herald;
            if (!oc.heralded) continue;  // attempt budget exhausted: zero-count row

            const double delta = -oc.heralded_detuning_mhz;  // laser minus emitter
            // a false herald (ionized after the counts were in) fluoresces no more
            double ee = 0.0;
            if (st.charge == Charge::Bright) {
                ee = cfg.ideal_pulses
                         ? ramsey_excited_population(ps.tau, ps.phi, delta, params,
                                                     cfg.include_decay)
                         : ramsey_population_finite_pulses(cfg, params, ps.tau, ps.phi, delta);
            }
            const double mean_per_rep =
                ee * params.detection_efficiency * window_factor + dark_mean;
            pt.counts = rng.poisson(mean_per_rep * double(cfg.n_reps_per_herald));
        }
    });
    return points;
}

// -------------------------------------------------------------------- g2 --

namespace {

// Waiting-time table for the next emission of the resonantly driven
// two-level emitter: evolve the unnormalized amplitude pair under the
// non-Hermitian Hamiltonian from the ground state; survival = |c_g|^2 + |c_e|^2.
struct WaitTable {
    std::vector<double> t_ns;
    std::vector<double> survival;  // monotone decreasing from 1

    WaitTable(double omega_rad_ns, double gamma_rad_ns) {
        const double dt = 0.02 / std::max(omega_rad_ns, gamma_rad_ns);
        std::complex<double> cg{1.0, 0.0}, ce{0.0, 0.0};
        const std::complex<double> i_unit{0.0, 1.0};
        auto deriv = [&](std::complex<double> g, std::complex<double> e) {
            return std::pair{-i_unit * (0.5 * omega_rad_ns) * e,
                             -i_unit * (0.5 * omega_rad_ns) * g - 0.5 * gamma_rad_ns * e};
        };
        double t = 0.0;
        t_ns.push_back(0.0);
        survival.push_back(1.0);
        while (std::norm(cg) + std::norm(ce) > 1e-12 && t < 1e7) {
            const auto [k1g, k1e] = deriv(cg, ce);
            const auto [k2g, k2e] = deriv(cg + 0.5 * dt * k1g, ce + 0.5 * dt * k1e);
            const auto [k3g, k3e] = deriv(cg + 0.5 * dt * k2g, ce + 0.5 * dt * k2e);
            const auto [k4g, k4e] = deriv(cg + dt * k3g, ce + dt * k3e);
            cg += dt / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
            ce += dt / 6.0 * (k1e + 2.0 * k2e + 2.0 * k3e + k4e);
            t += dt;
            t_ns.push_back(t);
            survival.push_back(std::norm(cg) + std::norm(ce));
        }
    }

    double sample(RngStream& rng) const {
        const double u = std::max(rng.uniform(), survival.back());
        // survival is sorted descending
        auto it = std::lower_bound(survival.begin(), survival.end(), u, std::greater<double>());
        const std::size_t k = std::min(std::size_t(it - survival.begin()), t_ns.size() - 1);
        if (k == 0) return 0.0;
        const double s1 = survival[k - 1], s2 = survival[k];
        const double f = s1 > s2 ? (s1 - u) / (s1 - s2) : 0.0;
        return t_ns[k - 1] + f * (t_ns[k] - t_ns[k - 1]);
    }
};

}  // namespace

G2Histogram run_g2(const G2Config& cfg, const EmitterParams& params, std::uint64_t seed,
                   int n_workers) {
    params.validate();
    if (cfg.duration_s <= 0 || cfg.bin_width_ns <= 0 || cfg.max_tau_ns <= 0)
        throw std::invalid_argument("run_g2: duration, bin width and max_tau must be > 0");
    const double gamma = params.gamma_rad_per_ns();
    const DriveField drive = DriveField::cw(params, cfg.power_nw, 0.0);
    const double omega = drive.rabi_rad_per_ns();
    if (omega <= 0) throw std::invalid_argument("run_g2: zero drive power");
    const WaitTable table(omega, gamma);

    const double emit_rate_ns =
        scattering_rate(0.0, params.saturation(cfg.power_nw), params) * 1e-9;
    const double det_rate_ns = emit_rate_ns * cfg.collection_efficiency;
    const double bg_rate_ns = cfg.background_fraction * det_rate_ns;

    const int n_bins = int(std::ceil(cfg.max_tau_ns / cfg.bin_width_ns));
    const double seg_ns = cfg.duration_s * 1e9 / cfg.n_segments;

    std::vector<std::vector<std::int64_t>> seg_hist(
        std::size_t(cfg.n_segments), std::vector<std::int64_t>(std::size_t(n_bins), 0));
    std::vector<std::int64_t> seg_events(std::size_t(cfg.n_segments), 0);

    run_blocks(cfg.n_segments, n_workers, [&](std::int64_t b) {
        RngStream rng = derive_stream(seed, std::uint64_t(b));
        std::vector<double> times;
        times.reserve(std::size_t(det_rate_ns * seg_ns * 1.2) + 16);
        double t = 0.0;
        for (;;) {
            t += table.sample(rng);
            if (t >= seg_ns) break;
            if (rng.bernoulli(cfg.collection_efficiency)) times.push_back(t);
        }
        if (bg_rate_ns > 0) {
            const std::int64_t nb = rng.poisson(bg_rate_ns * seg_ns);
            for (std::int64_t k = 0; k < nb; ++k) times.push_back(rng.uniform() * seg_ns);
            std::sort(times.begin(), times.end());
        }
        auto& hist = seg_hist[std::size_t(b)];
        for (std::size_t i = 0; i < times.size(); ++i) {
            for (std::size_t j = i + 1; j < times.size(); ++j) {
                const double dt = times[j] - times[i];
                if (dt >= cfg.max_tau_ns) break;
                ++hist[std::size_t(dt / cfg.bin_width_ns)];
            }
        }
        seg_events[std::size_t(b)] = std::int64_t(times.size());
    });

    G2Histogram out;
    out.tau_ns.resize(std::size_t(n_bins));
    out.pair_counts.assign(std::size_t(n_bins), 0);
    for (int k = 0; k < n_bins; ++k) {
        out.tau_ns[std::size_t(k)] = (k + 0.5) * cfg.bin_width_ns;
        for (const auto& h : seg_hist) out.pair_counts[std::size_t(k)] += h[std::size_t(k)];
    }
    for (auto e : seg_events) out.n_detections += e;

    // normalize to the long-delay plateau (correlations are dead well before
    // max_tau at any sane configuration)
    double plateau = 0.0;
    int n_plateau = 0;
    for (int k = int(0.75 * n_bins); k < n_bins; ++k) {
        plateau += double(out.pair_counts[std::size_t(k)]);
        ++n_plateau;
    }
    plateau = n_plateau > 0 ? plateau / n_plateau : 1.0;
    out.normalized.resize(std::size_t(n_bins));
    for (int k = 0; k < n_bins; ++k)
        out.normalized[std::size_t(k)] =
            plateau > 0 ? double(out.pair_counts[std::size_t(k)]) / plateau : 0.0;
    return out;
}

}  // namespace snvsim
