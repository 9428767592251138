#include "snvsim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "snvsim/fit.hpp"
#include "snvsim/stats.hpp"

namespace snvsim {

namespace {

std::map<std::string, std::string> base_meta(const RunConfig& cfg) {
    std::ostringstream hash;
    hash << "0x" << std::hex << config_hash(cfg);
    return {{"config_hash", hash.str()},
            {"seed", std::to_string(cfg.seed)},
            {"emitter", cfg.emitter_preset.empty() ? "custom" : cfg.emitter_preset},
            {"experiment", cfg.experiment_type()}};
}

std::string fmt_bool(bool b) { return b ? "1" : "0"; }

RecordFile pairs_record(const std::vector<PairShot>& shots, const RunConfig& cfg) {
    RecordFile rf;
    rf.schema = "pairs.v1";
    rf.meta = base_meta(cfg);
    rf.columns = {"shot", "c1", "c2", "ion1", "ion2", "charge_before", "center_before_mhz"};
    rf.rows.reserve(shots.size());
    for (std::size_t i = 0; i < shots.size(); ++i) {
        const PairShot& s = shots[i];
        rf.rows.push_back({std::to_string(i), std::to_string(s.c_first),
                           std::to_string(s.c_second), fmt_bool(s.ion_first),
                           fmt_bool(s.ion_second), std::to_string(int(s.charge_before)),
                           format_double(s.center_before_mhz)});
    }
    return rf;
}

void append_ple_rows(RecordFile& rf, const std::vector<PleRow>& rows,
                     const PleScanConfig& ple, std::int64_t c_pass_column) {
    const auto freqs = ple.frequency_axis();
    for (const PleRow& row : rows) {
        for (std::size_t k = 0; k < freqs.size(); ++k) {
            rf.rows.push_back({std::to_string(c_pass_column), std::to_string(row.scan),
                               std::to_string(k), format_double(freqs[k]),
                               std::to_string(row.counts[k]), fmt_bool(row.repumped_before),
                               fmt_bool(row.crc_heralded), std::to_string(row.crc_attempts),
                               std::to_string(row.crc_repumps), std::to_string(row.crc_counts),
                               format_double(row.center_truth_mhz),
                               std::to_string(int(row.charge_truth))});
        }
    }
}

RecordFile ple_record_header(const RunConfig& cfg) {
    RecordFile rf;
    rf.schema = "ple.v1";
    rf.meta = base_meta(cfg);
    rf.columns = {"c_pass",       "scan",        "step",       "f_mhz",
                  "counts",       "repumped",    "crc_herald", "crc_attempts",
                  "crc_repumps",  "crc_counts",  "center_truth_mhz", "charge_truth"};
    return rf;
}

RecordFile rabi_record(const RabiTraces& tr, const RabiConfig& cfg, const RunConfig& run) {
    RecordFile rf;
    rf.schema = "rabi.v1";
    rf.meta = base_meta(run);
    rf.meta["n_reps"] = std::to_string(cfg.n_reps);
    rf.meta["bin_width_ns"] = format_double(cfg.bin_width_ns);
    {
        std::ostringstream edges;
        for (std::size_t i = 0; i < cfg.interval_edges.size(); ++i)
            edges << (i ? "," : "") << cfg.interval_edges[i];
        rf.meta["interval_edges"] = edges.str();
    }
    rf.columns = {"interval", "t_ns", "counts", "n_sequences"};
    for (std::size_t iv = 0; iv < tr.n_intervals(); ++iv) {
        for (std::size_t k = 0; k < tr.t_ns.size(); ++k) {
            rf.rows.push_back({std::to_string(iv), format_double(tr.t_ns[k]),
                               std::to_string(tr.interval_traces[iv][k]),
                               std::to_string(tr.interval_sequences[iv])});
        }
    }
    return rf;
}

RecordFile ramsey_record(const std::vector<RamseyPoint>& pts, const RunConfig& run) {
    RecordFile rf;
    rf.schema = "ramsey.v1";
    rf.meta = base_meta(run);
    rf.columns = {"tau_ns", "phi_rad",      "mixed",           "counts",
                  "n_reps", "crc_attempts", "crc_final_counts", "heralded_detuning_mhz"};
    rf.rows.reserve(pts.size());
    for (const RamseyPoint& p : pts) {
        rf.rows.push_back({format_double(p.tau_ns), format_double(p.phi_rad),
                           fmt_bool(p.mixed_reference), std::to_string(p.counts),
                           std::to_string(p.n_reps), std::to_string(p.crc_attempts),
                           std::to_string(p.crc_final_counts),
                           format_double(p.heralded_detuning_mhz)});
    }
    return rf;
}

RecordFile g2_record(const G2Histogram& h, const RunConfig& run) {
    RecordFile rf;
    rf.schema = "g2.v1";
    rf.meta = base_meta(run);
    rf.meta["n_detections"] = std::to_string(h.n_detections);
    rf.columns = {"tau_ns", "pairs", "normalized"};
    for (std::size_t k = 0; k < h.tau_ns.size(); ++k)
        rf.rows.push_back({format_double(h.tau_ns[k]), std::to_string(h.pair_counts[k]),
                           format_double(h.normalized[k])});
    return rf;
}

}  // namespace

RunConfig default_run_config(const std::string& type) {
    RunConfig cfg;
    cfg.emitter = EmitterParams::snv_a();
    cfg.emitter_preset = "snv_a";
    if (type == "probe2") {
        DoubleProbeConfig e;
        e.probe_duration_us = 500.0;  // calibrated probe: ~110 counts on resonance
        e.n_shots = 10000;
        cfg.experiment = e;
    } else if (type == "pump_probe") {
        PumpProbeConfig e;
        e.probe_duration_us = 500.0;
        e.n_shots = 10000;
        cfg.experiment = e;
    } else if (type == "ple") {
        PleScanConfig e;
        e.n_scans = 200;
        e.policy = RepumpPolicy::ConditionalThreshold;
        // with the running mean taken over per-scan maxima, the flag must sit
        // below typical bright maxima so that only dark scans trigger a repump
        e.threshold_factor = 0.5;
        cfg.experiment = e;
    } else if (type == "rabi") {
        RabiConfig e;
        e.probe.c_pass = 110;
        e.probe.c_repump = 10;
        e.n_sequences = 4000;
        cfg.experiment = e;
    } else if (type == "ramsey") {
        RamseyConfig e;
        e.crc.c_pass = 110;
        e.crc.c_repump = 10;
        e.crc.probe_power_nw = 1000.0;  // saturating probe: wide herald window
        e.tau_grid_ns = RamseyConfig::default_grid();
        cfg.experiment = e;
    } else if (type == "g2") {
        cfg.experiment = G2Config{};
    } else if (type == "crc_sweep") {
        CrcSweepConfig e;
        e.ple.f_start_mhz = -250.0;
        e.ple.f_end_mhz = 250.0;
        e.ple.n_scans = 250;
        e.ple.policy = RepumpPolicy::CrcBeforeScan;
        e.ple.crc.c_pass = 110;
        e.ple.crc.c_repump = 10;
        cfg.experiment = e;
    } else {
        throw ConfigError("unknown experiment type '" + type + "'");
    }
    return cfg;
}

RecordFile run_and_record(const RunConfig& cfg) {
    cfg.emitter.validate();
    return std::visit(
        [&](const auto& e) -> RecordFile {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, DoubleProbeConfig>) {
                RecordFile rf = pairs_record(run_double_probe(e, cfg.emitter, cfg.seed,
                                                              cfg.n_workers), cfg);
                rf.meta["kind"] = "probe2";
                return rf;
            } else if constexpr (std::is_same_v<T, PumpProbeConfig>) {
                RecordFile rf = pairs_record(run_probe_repump_probe(e, cfg.emitter, cfg.seed,
                                                                    cfg.n_workers), cfg);
                rf.meta["kind"] = "pump_probe";
                return rf;
            } else if constexpr (std::is_same_v<T, PleScanConfig>) {
                RecordFile rf = ple_record_header(cfg);
                const std::int64_t cp =
                    e.policy == RepumpPolicy::CrcBeforeScan ? e.crc.c_pass : -1;
                append_ple_rows(rf, run_ple_scan(e, cfg.emitter, cfg.seed, cfg.n_workers), e, cp);
                return rf;
            } else if constexpr (std::is_same_v<T, RabiConfig>) {
                return rabi_record(run_rabi(e, cfg.emitter, cfg.seed, cfg.n_workers), e, cfg);
            } else if constexpr (std::is_same_v<T, RamseyConfig>) {
                return ramsey_record(run_ramsey(e, cfg.emitter, cfg.seed, cfg.n_workers), cfg);
            } else if constexpr (std::is_same_v<T, G2Config>) {
                return g2_record(run_g2(e, cfg.emitter, cfg.seed, cfg.n_workers), cfg);
            } else {  // CrcSweepConfig
                RecordFile rf = ple_record_header(cfg);
                for (std::size_t i = 0; i < e.c_pass_values.size(); ++i) {
                    PleScanConfig ple = e.ple;
                    ple.policy = RepumpPolicy::CrcBeforeScan;
                    ple.crc.c_pass = e.c_pass_values[i];
                    const std::uint64_t sub_seed = cfg.seed + 1000003ull * (i + 1);
                    append_ple_rows(rf, run_ple_scan(ple, cfg.emitter, sub_seed, cfg.n_workers),
                                    ple, e.c_pass_values[i]);
                }
                return rf;
            }
        },
        cfg.experiment);
}

// ------------------------------------------------------------- analysis ---

namespace {

struct PleScanData {
    std::vector<double> f, counts;
    std::int64_t c_pass = -1;
    std::int64_t scan = 0;
};

std::vector<PleScanData> gather_ple(const RecordFile& in) {
    const auto ic = in.column_index("counts");
    const auto iff = in.column_index("f_mhz");
    const auto is = in.column_index("scan");
    const auto ip = in.column_index("c_pass");
    std::map<std::pair<std::int64_t, std::int64_t>, PleScanData> by_key;
    for (std::size_t r = 0; r < in.rows.size(); ++r) {
        const auto key = std::make_pair(in.as_int(r, ip), in.as_int(r, is));
        PleScanData& d = by_key[key];
        d.c_pass = key.first;
        d.scan = key.second;
        d.f.push_back(in.as_number(r, iff));
        d.counts.push_back(in.as_number(r, ic));
    }
    std::vector<PleScanData> out;
    out.reserve(by_key.size());
    for (auto& [k, v] : by_key) out.push_back(std::move(v));
    return out;
}

void push_fit_rows(RecordFile& rf, const std::string& group, const std::string& model,
                   const FitResult& fit) {
    for (std::size_t i = 0; i < fit.params.size(); ++i) {
        rf.rows.push_back({group, model, fit.names[i], format_double(fit.params[i]),
                           format_double(fit.stderrs[i]), fmt_bool(fit.converged),
                           std::to_string(fit.n_iter), format_double(fit.residual_norm)});
    }
}

RecordFile fits_header(const RecordFile& in) {
    RecordFile rf;
    rf.schema = "fits.v1";
    rf.meta = in.meta;
    rf.meta["source_schema"] = in.schema;
    rf.columns = {"group", "model", "param", "value", "stderr", "converged", "n_iter",
                  "residual_norm"};
    return rf;
}

RecordFile analyze_ramsey(const RecordFile& in) {
    const auto it = in.column_index("tau_ns");
    const auto iphi = in.column_index("phi_rad");
    const auto imix = in.column_index("mixed");
    const auto ic = in.column_index("counts");
    const auto irep = in.column_index("n_reps");

    std::map<std::pair<double, double>, std::pair<double, std::int64_t>> fringe;  // sum, n
    double mixed_sum = 0;
    std::int64_t mixed_n = 0;
    for (std::size_t r = 0; r < in.rows.size(); ++r) {
        const double reps = in.as_number(r, irep);
        if (reps <= 0) continue;
        const double per_rep = in.as_number(r, ic) / reps;
        if (in.as_int(r, imix) != 0) {
            mixed_sum += per_rep;
            ++mixed_n;
        } else {
            auto& acc = fringe[{in.as_number(r, it), in.as_number(r, iphi)}];
            acc.first += per_rep;
            ++acc.second;
        }
    }
    if (mixed_n == 0) throw std::runtime_error("ramsey record has no mixed-state reference rows");
    const double norm = 2.0 * (mixed_sum / double(mixed_n));

    std::map<double, std::vector<std::pair<double, double>>> by_tau;  // tau -> (phi, y)
    for (const auto& [key, acc] : fringe)
        by_tau[key.first].emplace_back(key.second, acc.first / double(acc.second) / norm);

    RecordFile rf = fits_header(in);
    std::vector<double> taus, amps, weights;
    for (const auto& [tau, pts] : by_tau) {
        std::vector<double> phis, ys;
        for (auto [p, y] : pts) {
            phis.push_back(p);
            ys.push_back(y);
        }
        const FitResult fr = fit_phase_fringe(phis, ys);
        std::ostringstream group;
        group << "tau=" << format_double(tau);
        push_fit_rows(rf, group.str(), "phase_sine", fr);
        taus.push_back(tau);
        amps.push_back(fr.param("amplitude"));
        const double se = fr.stderr_of("amplitude");
        weights.push_back(se > 0 ? 1.0 / (se * se) : 1.0);
    }
    const FitResult env = fit_gaussian_envelope(taus, amps, weights);
    push_fit_rows(rf, "envelope", "gaussian_envelope", env);
    return rf;
}

}  // namespace

RecordFile analyze_fit(const RecordFile& in, const AnalyzeOptions& opts) {
    if (in.schema == "ple.v1") {
        RecordFile rf = fits_header(in);
        for (const PleScanData& d : gather_ple(in)) {
            const FitResult fr = fit_lorentzian_peak(d.f, d.counts, opts.window_mhz);
            std::ostringstream group;
            if (d.c_pass >= 0) group << "c_pass=" << d.c_pass << ",";
            group << "scan=" << d.scan;
            push_fit_rows(rf, group.str(), "lorentzian", fr);
        }
        return rf;
    }
    if (in.schema == "rabi.v1") {
        RecordFile rf = fits_header(in);
        const auto iv = in.column_index("interval");
        const auto it = in.column_index("t_ns");
        const auto ic = in.column_index("counts");
        std::map<std::int64_t, std::pair<std::vector<double>, std::vector<double>>> traces;
        for (std::size_t r = 0; r < in.rows.size(); ++r) {
            auto& tr = traces[in.as_int(r, iv)];
            tr.first.push_back(in.as_number(r, it));
            tr.second.push_back(in.as_number(r, ic));
        }
        for (const auto& [interval, tr] : traces) {
            const FitResult fr = fit_damped_sine(tr.first, tr.second);
            push_fit_rows(rf, "interval=" + std::to_string(interval), "damped_sine", fr);
        }
        return rf;
    }
    if (in.schema == "ramsey.v1") return analyze_ramsey(in);
    if (in.schema == "g2.v1") {
        RecordFile rf = fits_header(in);
        const auto it = in.column_index("tau_ns");
        const auto inorm = in.column_index("normalized");
        std::vector<double> taus, ys;
        for (std::size_t r = 0; r < in.rows.size(); ++r) {
            taus.push_back(in.as_number(r, it));
            ys.push_back(in.as_number(r, inorm));
        }
        push_fit_rows(rf, "g2", "g2_model", fit_g2(taus, ys));
        return rf;
    }
    throw std::runtime_error("analyze fit: no fitting rule for schema '" + in.schema + "'");
}

RecordFile analyze_stats(const RecordFile& in, const AnalyzeOptions& opts) {
    RecordFile rf;
    rf.schema = "stats.v1";
    rf.meta = in.meta;
    rf.meta["source_schema"] = in.schema;
    rf.columns = {"group", "name", "value"};
    auto push = [&](const std::string& group, const std::string& name, double v) {
        rf.rows.push_back({group, name, format_double(v)});
    };

    if (in.schema == "pairs.v1") {
        const std::int64_t theta = opts.threshold.value_or(100);
        const auto i1 = in.column_index("c1");
        const auto i2 = in.column_index("c2");
        const auto ia = in.column_index("ion1");
        const auto ib = in.column_index("ion2");
        std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
        std::int64_t ionized = 0;
        for (std::size_t r = 0; r < in.rows.size(); ++r) {
            pairs.emplace_back(in.as_int(r, i1), in.as_int(r, i2));
            if (in.as_int(r, ia) != 0 || in.as_int(r, ib) != 0) ++ionized;
        }
        const CorrelationMetrics cm = correlation_metrics(pairs, theta);
        push("pairs", "n", double(pairs.size()));
        if (cm.pearson_r) push("pairs", "pearson_r", *cm.pearson_r);
        push("pairs", "band_occupancy", double(ionized) / double(pairs.size()));

        std::int64_t n_above = 0;
        double sum_above = 0;
        std::vector<std::int64_t> above;
        for (auto [a, b] : pairs) {
            if (a >= theta) {
                ++n_above;
                sum_above += double(b);
                above.push_back(b);
            }
        }
        push("pairs", "threshold", double(theta));
        push("pairs", "pass_probability", double(n_above) / double(pairs.size()));
        if (n_above > 1) {
            push("pairs", "cond_mean_second", sum_above / double(n_above));
            push("pairs", "cond_fano_second", fano_factor(above));
        }
        return rf;
    }

    if (in.schema == "fits.v1") {
        // center spread per c_pass group from converged line fits
        const auto ig = in.column_index("group");
        const auto ip = in.column_index("param");
        const auto ival = in.column_index("value");
        const auto iconv = in.column_index("converged");
        std::map<std::string, std::vector<double>> centers;
        for (std::size_t r = 0; r < in.rows.size(); ++r) {
            if (in.rows[r][ip] != "center" || in.as_int(r, iconv) == 0) continue;
            const std::string& group = in.rows[r][ig];
            const auto comma = group.find(',');
            const std::string key =
                comma == std::string::npos ? std::string("all") : group.substr(0, comma);
            centers[key].push_back(in.as_number(r, ival));
        }
        if (centers.empty()) throw std::runtime_error("analyze stats: no converged line centers");
        for (const auto& [key, vals] : centers) {
            if (vals.size() < 3) continue;
            const CenterStats st = center_statistics(vals);
            push(key, "n", double(st.n));
            push(key, "center_mean_mhz", st.mean_mhz);
            push(key, "center_std_mhz", st.std_mhz);
            push(key, "stderr_of_std_mhz", st.stderr_of_std_mhz);
        }
        return rf;
    }
    throw std::runtime_error("analyze stats: no statistics rule for schema '" + in.schema + "'");
}

// -------------------------------------------------------------- reports ---

namespace {

RecordFile figure_header(const std::string& figure, std::uint64_t seed) {
    RecordFile rf;
    rf.schema = "figure." + figure + ".v1";
    rf.meta = {{"seed", std::to_string(seed)}, {"figure", figure}};
    return rf;
}

RecordFile figure_1d(std::uint64_t seed, int workers) {
    RunConfig cfg = default_run_config("ple");
    cfg.emitter = EmitterParams::snv_b();  // wide spectral diffusion panel
    cfg.emitter_preset = "snv_b";
    cfg.seed = seed;
    cfg.n_workers = workers;
    auto& ple = std::get<PleScanConfig>(cfg.experiment);
    ple.n_scans = 300;
    const RecordFile rec = run_and_record(cfg);
    RecordFile rf = figure_header("1d", seed);
    rf.columns = {"scan", "f_mhz", "counts", "repumped"};
    const auto is = rec.column_index("scan"), iff = rec.column_index("f_mhz"),
               ic = rec.column_index("counts"), ir = rec.column_index("repumped");
    for (std::size_t r = 0; r < rec.rows.size(); ++r)
        rf.rows.push_back({rec.rows[r][is], rec.rows[r][iff], rec.rows[r][ic], rec.rows[r][ir]});
    return rf;
}

RecordFile figure_2b(std::uint64_t seed, int workers) {
    RecordFile rf = figure_header("2b", seed);
    rf.columns = {"power_nw", "c1", "c2"};
    const double powers[] = {10.0, 100.0, 200.0};
    for (int i = 0; i < 3; ++i) {
        RunConfig cfg = default_run_config("probe2");
        cfg.seed = seed + std::uint64_t(i) * 7919;
        cfg.n_workers = workers;
        auto& e = std::get<DoubleProbeConfig>(cfg.experiment);
        e.probe_power_nw = powers[i];
        const auto shots = run_double_probe(e, cfg.emitter, cfg.seed, workers);
        for (const auto& s : shots)
            rf.rows.push_back({format_double(powers[i]), std::to_string(s.c_first),
                               std::to_string(s.c_second)});
    }
    return rf;
}

RecordFile figure_2c(std::uint64_t seed, int workers) {
    RunConfig cfg = default_run_config("probe2");
    cfg.seed = seed;
    cfg.n_workers = workers;
    const auto& e = std::get<DoubleProbeConfig>(cfg.experiment);
    const auto shots = run_double_probe(e, cfg.emitter, seed, workers);
    std::map<std::int64_t, std::pair<std::int64_t, std::int64_t>> hist;  // c2 -> (above, below)
    for (const auto& s : shots) {
        if (s.c_first > 100)
            ++hist[s.c_second].first;
        else
            ++hist[s.c_second].second;
    }
    RecordFile rf = figure_header("2c", seed);
    rf.columns = {"c2", "n_given_c1_above_100", "n_given_c1_below_100"};
    for (const auto& [c2, nn] : hist)
        rf.rows.push_back({std::to_string(c2), std::to_string(nn.first),
                           std::to_string(nn.second)});
    return rf;
}

RecordFile figure_2d(std::uint64_t seed, int workers) {
    RunConfig cfg = default_run_config("probe2");
    cfg.seed = seed;
    cfg.n_workers = workers;
    const auto& e = std::get<DoubleProbeConfig>(cfg.experiment);
    const auto shots = run_double_probe(e, cfg.emitter, seed, workers);
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    for (const auto& s : shots) pairs.emplace_back(s.c_first, s.c_second);
    RecordFile rf = figure_header("2d", seed);
    rf.columns = {"threshold", "pass_probability"};
    for (auto [theta, p] : pass_probability_curve(pairs, 200))
        rf.rows.push_back({std::to_string(theta), format_double(p)});
    return rf;
}

RecordFile figure_3c(std::uint64_t seed, int workers) {
    RunConfig cfg = default_run_config("rabi");
    cfg.seed = seed;
    cfg.n_workers = workers;
    const RecordFile rec = run_and_record(cfg);
    const RecordFile fits = analyze_fit(rec);
    RecordFile rf = figure_header("3c", seed);
    rf.columns = {"interval", "t_ns", "counts", "n_sequences"};
    for (const auto& row : rec.rows)
        rf.rows.push_back({row[rec.column_index("interval")], row[rec.column_index("t_ns")],
                           row[rec.column_index("counts")],
                           row[rec.column_index("n_sequences")]});
    // fitted parameters ride along in the header
    const auto ig = fits.column_index("group"), ip = fits.column_index("param"),
               iv = fits.column_index("value");
    for (std::size_t r = 0; r < fits.rows.size(); ++r) {
        const std::string& p = fits.rows[r][ip];
        if (p == "freq" || p == "t_decay")
            rf.meta[fits.rows[r][ig] + "." + p] = fits.rows[r][iv];
    }
    return rf;
}

RecordFile centers_by_cpass(const RecordFile& rec, std::optional<double> window,
                            std::map<std::int64_t, std::vector<double>>* out_centers) {
    AnalyzeOptions opts;
    opts.window_mhz = window;
    const RecordFile fits = analyze_fit(rec, opts);
    const auto ig = fits.column_index("group"), ip = fits.column_index("param"),
               iv = fits.column_index("value"), ic = fits.column_index("converged");
    for (std::size_t r = 0; r < fits.rows.size(); ++r) {
        if (fits.rows[r][ip] != "center" || fits.rows[r][ic] == "0") continue;
        const std::string& g = fits.rows[r][ig];
        if (g.rfind("c_pass=", 0) != 0) continue;
        const std::int64_t cp = std::stoll(g.substr(7, g.find(',') - 7));
        (*out_centers)[cp].push_back(std::stod(fits.rows[r][iv]));
    }
    return fits;
}

RecordFile figure_4b(std::uint64_t seed, int workers) {
    RunConfig cfg = default_run_config("crc_sweep");
    cfg.seed = seed;
    cfg.n_workers = workers;
    auto& e = std::get<CrcSweepConfig>(cfg.experiment);
    e.c_pass_values = {50, 110};
    const RecordFile rec = run_and_record(cfg);
    std::map<std::int64_t, std::vector<double>> centers;
    centers_by_cpass(rec, std::nullopt, &centers);
    RecordFile rf = figure_header("4b", seed);
    rf.columns = {"kind", "c_pass", "scan", "f_mhz", "counts", "center_mhz"};
    const auto icp = rec.column_index("c_pass"), is = rec.column_index("scan"),
               iff = rec.column_index("f_mhz"), ic = rec.column_index("counts");
    for (std::size_t r = 0; r < rec.rows.size(); ++r)
        rf.rows.push_back({"map", rec.rows[r][icp], rec.rows[r][is], rec.rows[r][iff],
                           rec.rows[r][ic], ""});
    for (const auto& [cp, cs] : centers) {
        for (std::size_t i = 0; i < cs.size(); ++i)
            rf.rows.push_back({"center", std::to_string(cp), std::to_string(i), "", "",
                               format_double(cs[i])});
    }
    return rf;
}

RecordFile figure_4c(std::uint64_t seed, int workers) {
    RunConfig cfg = default_run_config("crc_sweep");
    cfg.seed = seed;
    cfg.n_workers = workers;
    const RecordFile rec = run_and_record(cfg);
    std::map<std::int64_t, std::vector<double>> centers;
    centers_by_cpass(rec, std::nullopt, &centers);
    RecordFile rf = figure_header("4c", seed);
    rf.columns = {"c_pass", "center_std_mhz", "stderr_of_std_mhz", "n_scans"};
    for (const auto& [cp, cs] : centers) {
        const CenterStats st = center_statistics(cs);
        rf.rows.push_back({std::to_string(cp), format_double(st.std_mhz),
                           format_double(st.stderr_of_std_mhz), std::to_string(st.n)});
    }
    return rf;
}

RecordFile figure_4e(std::uint64_t seed, int workers) {
    RecordFile rf = figure_header("4e", seed);
    rf.columns = {"setpoint_mhz", "mean_center_mhz", "std_mhz", "n_scans"};
    const double setpoints[] = {-100, -50, 0, 50, 100};
    for (int i = 0; i < 5; ++i) {
        RunConfig cfg = default_run_config("crc_sweep");
        cfg.emitter = EmitterParams::snv_b();
        cfg.emitter_preset = "snv_b";
        cfg.seed = seed + std::uint64_t(i) * 104729;
        cfg.n_workers = workers;
        auto& e = std::get<CrcSweepConfig>(cfg.experiment);
        e.c_pass_values = {110};
        e.ple.n_scans = 40;
        e.ple.crc.c_repump = 40;  // escape the between-thresholds retry band faster
        e.ple.crc.max_attempts = 100000;
        e.ple.crc.probe_laser_offset_mhz = setpoints[i];
        const RecordFile rec = run_and_record(cfg);
        std::map<std::int64_t, std::vector<double>> centers;
        centers_by_cpass(rec, 60.0, &centers);
        if (!centers.count(110) || centers[110].size() < 3)
            throw std::runtime_error("figure 4e: too few heralded scans at setpoint " +
                                     format_double(setpoints[i]));
        const CenterStats st = center_statistics(centers[110]);
        rf.rows.push_back({format_double(setpoints[i]), format_double(st.mean_mhz),
                           format_double(st.std_mhz), std::to_string(st.n)});
    }
    return rf;
}

void ramsey_figure_rows(const RecordFile& rec, std::int64_t c_pass, RecordFile* points_out,
                        RecordFile* contrast_out) {
    const RecordFile fits = analyze_ramsey(rec);

    // normalized fringe points
    const auto it = rec.column_index("tau_ns"), iphi = rec.column_index("phi_rad"),
               imix = rec.column_index("mixed"), ic = rec.column_index("counts"),
               irep = rec.column_index("n_reps");
    std::map<std::pair<double, double>, std::pair<double, std::int64_t>> acc;
    double mixed_sum = 0;
    std::int64_t mixed_n = 0;
    for (std::size_t r = 0; r < rec.rows.size(); ++r) {
        const double per_rep = rec.as_number(r, ic) / std::max(1.0, rec.as_number(r, irep));
        if (rec.as_int(r, imix) != 0) {
            mixed_sum += per_rep;
            ++mixed_n;
            continue;
        }
        auto& a = acc[{rec.as_number(r, it), rec.as_number(r, iphi)}];
        a.first += per_rep;
        ++a.second;
    }
    const double norm = 2.0 * mixed_sum / double(std::max<std::int64_t>(mixed_n, 1));
    if (points_out) {
        for (const auto& [key, a] : acc)
            points_out->rows.push_back({std::to_string(c_pass), format_double(key.first),
                                        format_double(key.second),
                                        format_double(a.first / double(a.second) / norm)});
    }
    if (contrast_out) {
        const auto ig = fits.column_index("group"), ip = fits.column_index("param"),
                   iv = fits.column_index("value"), ie = fits.column_index("stderr");
        for (std::size_t r = 0; r < fits.rows.size(); ++r) {
            const std::string& g = fits.rows[r][ig];
            if (g.rfind("tau=", 0) == 0 && fits.rows[r][ip] == "amplitude") {
                contrast_out->rows.push_back({"contrast", std::to_string(c_pass), g.substr(4),
                                              fits.rows[r][iv], fits.rows[r][ie]});
            } else if (g == "envelope" &&
                       (fits.rows[r][ip] == "t2_star" || fits.rows[r][ip] == "a0")) {
                contrast_out->rows.push_back({"fit_" + fits.rows[r][ip], std::to_string(c_pass),
                                              "", fits.rows[r][iv], fits.rows[r][ie]});
            }
        }
    }
}

RecordFile run_ramsey_threshold(std::uint64_t seed, int workers, std::int64_t c_pass) {
    RunConfig cfg = default_run_config("ramsey");
    cfg.emitter = EmitterParams::snv_b();
    cfg.emitter_preset = "snv_b";
    cfg.seed = seed;
    cfg.n_workers = workers;
    auto& e = std::get<RamseyConfig>(cfg.experiment);
    e.crc.c_pass = c_pass;
    return run_and_record(cfg);
}

RecordFile figure_5b(std::uint64_t seed, int workers) {
    RecordFile rf = figure_header("5b", seed);
    rf.columns = {"c_pass", "tau_ns", "phi_rad", "normalized"};
    const std::int64_t thresholds[] = {10, 60, 110};
    for (int i = 0; i < 3; ++i) {
        const RecordFile rec =
            run_ramsey_threshold(seed + std::uint64_t(i) * 15485863, workers, thresholds[i]);
        ramsey_figure_rows(rec, thresholds[i], &rf, nullptr);
    }
    return rf;
}

RecordFile figure_5c(std::uint64_t seed, int workers) {
    RecordFile rf = figure_header("5c", seed);
    rf.columns = {"kind", "c_pass", "tau_ns", "value", "stderr"};
    const std::int64_t thresholds[] = {10, 60, 110};
    for (int i = 0; i < 3; ++i) {
        const RecordFile rec =
            run_ramsey_threshold(seed + std::uint64_t(i) * 15485863, workers, thresholds[i]);
        ramsey_figure_rows(rec, thresholds[i], nullptr, &rf);
    }
    return rf;
}

}  // namespace

RecordFile report_figure(const std::string& name, std::uint64_t seed, int n_workers) {
    if (name == "1d") return figure_1d(seed, n_workers);
    if (name == "2b") return figure_2b(seed, n_workers);
    if (name == "2c") return figure_2c(seed, n_workers);
    if (name == "2d") return figure_2d(seed, n_workers);
    if (name == "3c") return figure_3c(seed, n_workers);
    if (name == "4b") return figure_4b(seed, n_workers);
    if (name == "4c") return figure_4c(seed, n_workers);
    if (name == "4e") return figure_4e(seed, n_workers);
    if (name == "5b") return figure_5b(seed, n_workers);
    if (name == "5c") return figure_5c(seed, n_workers);
    throw ConfigError("report figure: unknown panel '" + name +
                      "' (expected one of 1d 2b 2c 2d 3c 4b 4c 4e 5b 5c)");
}

}  // namespace snvsim
