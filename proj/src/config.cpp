#include "snvsim/config.hpp"

#include <json.hpp>
#include <set>

namespace snvsim {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key()))
            throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
}

double num(const json& obj, const std::string& key, double fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return obj[key].get<double>();
}

std::int64_t integer(const json& obj, const std::string& key, std::int64_t fallback,
                     const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer())
        throw ConfigError(where + "." + key + ": expected an integer");
    return obj[key].get<std::int64_t>();
}

bool boolean(const json& obj, const std::string& key, bool fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) throw ConfigError(where + "." + key + ": expected a boolean");
    return obj[key].get<bool>();
}

EmitterParams parse_emitter(const json& j, std::string* preset_name) {
    if (j.is_string()) {
        *preset_name = j.get<std::string>();
        try {
            return EmitterParams::preset(*preset_name);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("emitter: ") + e.what());
        }
    }
    preset_name->clear();
    check_keys(j,
               {"natural_linewidth_mhz", "nominal_center_mhz", "inhomogeneous_sigma_mhz",
                "ionization_yield", "detection_efficiency", "dark_count_rate_hz",
                "saturation_power_nw", "pulse_saturation_power_nw", "repump_dose_scale",
                "repump_max_prob", "preset"},
               "emitter");
    EmitterParams p = EmitterParams::snv_a();
    if (j.contains("preset")) p = EmitterParams::preset(j["preset"].get<std::string>());
    p.natural_linewidth_mhz = num(j, "natural_linewidth_mhz", p.natural_linewidth_mhz, "emitter");
    p.nominal_center_mhz = num(j, "nominal_center_mhz", p.nominal_center_mhz, "emitter");
    p.inhomogeneous_sigma_mhz =
        num(j, "inhomogeneous_sigma_mhz", p.inhomogeneous_sigma_mhz, "emitter");
    p.ionization_yield = num(j, "ionization_yield", p.ionization_yield, "emitter");
    p.detection_efficiency = num(j, "detection_efficiency", p.detection_efficiency, "emitter");
    p.dark_count_rate_hz = num(j, "dark_count_rate_hz", p.dark_count_rate_hz, "emitter");
    p.saturation_power_nw = num(j, "saturation_power_nw", p.saturation_power_nw, "emitter");
    p.pulse_saturation_power_nw =
        num(j, "pulse_saturation_power_nw", p.pulse_saturation_power_nw, "emitter");
    p.repump_dose_scale = num(j, "repump_dose_scale", p.repump_dose_scale, "emitter");
    p.repump_max_prob = num(j, "repump_max_prob", p.repump_max_prob, "emitter");
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("emitter: ") + e.what());
    }
    return p;
}

CrcConfig parse_crc(const json& j, const std::string& where) {
    check_keys(j,
               {"c_pass", "c_repump", "probe_duration_us", "probe_power_nw",
                "repump_duration_us", "repump_power_uw", "clock_period_us", "max_attempts",
                "probe_laser_offset_mhz"},
               where);
    CrcConfig c;
    c.c_pass = integer(j, "c_pass", c.c_pass, where);
    c.c_repump = integer(j, "c_repump", c.c_repump, where);
    c.probe_duration_us = num(j, "probe_duration_us", c.probe_duration_us, where);
    c.probe_power_nw = num(j, "probe_power_nw", c.probe_power_nw, where);
    c.repump_duration_us = num(j, "repump_duration_us", c.repump_duration_us, where);
    c.repump_power_uw = num(j, "repump_power_uw", c.repump_power_uw, where);
    c.clock_period_us = num(j, "clock_period_us", c.clock_period_us, where);
    c.max_attempts = integer(j, "max_attempts", c.max_attempts, where);
    c.probe_laser_offset_mhz = num(j, "probe_laser_offset_mhz", c.probe_laser_offset_mhz, where);
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
    return c;
}

PleScanConfig parse_ple(const json& j, const std::string& where) {
    check_keys(j,
               {"type", "f_start_mhz", "f_end_mhz", "scan_rate_ghz_per_s", "dwell_us", "n_scans",
                "probe_power_nw", "policy", "threshold_factor", "repump_power_uw",
                "repump_duration_us", "crc", "second_emitter", "block_size_scans"},
               where);
    PleScanConfig c;
    c.f_start_mhz = num(j, "f_start_mhz", c.f_start_mhz, where);
    c.f_end_mhz = num(j, "f_end_mhz", c.f_end_mhz, where);
    c.scan_rate_ghz_per_s = num(j, "scan_rate_ghz_per_s", c.scan_rate_ghz_per_s, where);
    c.dwell_us = num(j, "dwell_us", c.dwell_us, where);
    c.n_scans = int(integer(j, "n_scans", c.n_scans, where));
    c.probe_power_nw = num(j, "probe_power_nw", c.probe_power_nw, where);
    c.threshold_factor = num(j, "threshold_factor", c.threshold_factor, where);
    c.repump_power_uw = num(j, "repump_power_uw", c.repump_power_uw, where);
    c.repump_duration_us = num(j, "repump_duration_us", c.repump_duration_us, where);
    c.block_size_scans = int(integer(j, "block_size_scans", c.block_size_scans, where));
    if (j.contains("policy")) {
        const std::string p = j["policy"].get<std::string>();
        if (p == "none")
            c.policy = RepumpPolicy::None;
        else if (p == "conditional_threshold")
            c.policy = RepumpPolicy::ConditionalThreshold;
        else if (p == "crc_before_scan")
            c.policy = RepumpPolicy::CrcBeforeScan;
        else
            throw ConfigError(where + ".policy: unknown policy '" + p + "'");
    }
    if (j.contains("crc")) c.crc = parse_crc(j["crc"], where + ".crc");
    if (j.contains("second_emitter")) {
        const json& se = j["second_emitter"];
        check_keys(se, {"offset_mhz", "relative_strength"}, where + ".second_emitter");
        SecondEmitter s;
        s.offset_mhz = num(se, "offset_mhz", s.offset_mhz, where + ".second_emitter");
        s.relative_strength =
            num(se, "relative_strength", s.relative_strength, where + ".second_emitter");
        c.second_emitter = s;
    }
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
    return c;
}

RabiConfig parse_rabi(const json& j, const std::string& where) {
    check_keys(j,
               {"type", "crc", "live_crc", "pulse_power_nw", "pulse_duration_ns", "bin_width_ns",
                "n_reps", "n_sequences", "interval_edges", "block_size"},
               where);
    RabiConfig c;
    if (j.contains("crc")) c.probe = parse_crc(j["crc"], where + ".crc");
    c.live_crc = boolean(j, "live_crc", c.live_crc, where);
    c.pulse_power_nw = num(j, "pulse_power_nw", c.pulse_power_nw, where);
    c.pulse_duration_ns = num(j, "pulse_duration_ns", c.pulse_duration_ns, where);
    c.bin_width_ns = num(j, "bin_width_ns", c.bin_width_ns, where);
    c.n_reps = int(integer(j, "n_reps", c.n_reps, where));
    c.n_sequences = integer(j, "n_sequences", c.n_sequences, where);
    c.block_size = int(integer(j, "block_size", c.block_size, where));
    if (j.contains("interval_edges")) {
        if (!j["interval_edges"].is_array())
            throw ConfigError(where + ".interval_edges: expected an array");
        c.interval_edges.clear();
        for (const auto& v : j["interval_edges"]) c.interval_edges.push_back(v.get<std::int64_t>());
        for (size_t i = 1; i < c.interval_edges.size(); ++i)
            if (c.interval_edges[i] <= c.interval_edges[i - 1])
                throw ConfigError(where + ".interval_edges: must be strictly increasing");
    }
    return c;
}

RamseyConfig parse_ramsey(const json& j, const std::string& where) {
    check_keys(j,
               {"type", "crc", "tau_grid_ns", "n_phases", "n_heralds_per_point",
                "n_reps_per_herald", "readout_window_ns", "ideal_pulses", "pulse_rabi_mhz",
                "include_decay", "mixed_tau_ns"},
               where);
    RamseyConfig c;
    if (j.contains("crc")) c.crc = parse_crc(j["crc"], where + ".crc");
    if (j.contains("tau_grid_ns")) {
        if (!j["tau_grid_ns"].is_array())
            throw ConfigError(where + ".tau_grid_ns: expected an array");
        c.tau_grid_ns.clear();
        for (const auto& v : j["tau_grid_ns"]) c.tau_grid_ns.push_back(v.get<double>());
        if (c.tau_grid_ns.empty()) throw ConfigError(where + ".tau_grid_ns: empty grid");
    }
    c.n_phases = int(integer(j, "n_phases", c.n_phases, where));
    c.n_heralds_per_point = integer(j, "n_heralds_per_point", c.n_heralds_per_point, where);
    c.n_reps_per_herald = int(integer(j, "n_reps_per_herald", c.n_reps_per_herald, where));
    c.readout_window_ns = num(j, "readout_window_ns", c.readout_window_ns, where);
    c.ideal_pulses = boolean(j, "ideal_pulses", c.ideal_pulses, where);
    c.pulse_rabi_mhz = num(j, "pulse_rabi_mhz", c.pulse_rabi_mhz, where);
    c.include_decay = boolean(j, "include_decay", c.include_decay, where);
    c.mixed_tau_ns = num(j, "mixed_tau_ns", c.mixed_tau_ns, where);
    if (c.n_phases < 4) throw ConfigError(where + ".n_phases: need >= 4");
    return c;
}

G2Config parse_g2(const json& j, const std::string& where) {
    check_keys(j,
               {"type", "power_nw", "duration_s", "collection_efficiency", "bin_width_ns",
                "max_tau_ns", "background_fraction", "n_segments"},
               where);
    G2Config c;
    c.power_nw = num(j, "power_nw", c.power_nw, where);
    c.duration_s = num(j, "duration_s", c.duration_s, where);
    c.collection_efficiency = num(j, "collection_efficiency", c.collection_efficiency, where);
    c.bin_width_ns = num(j, "bin_width_ns", c.bin_width_ns, where);
    c.max_tau_ns = num(j, "max_tau_ns", c.max_tau_ns, where);
    c.background_fraction = num(j, "background_fraction", c.background_fraction, where);
    c.n_segments = int(integer(j, "n_segments", c.n_segments, where));
    if (c.collection_efficiency <= 0 || c.collection_efficiency > 1)
        throw ConfigError(where + ".collection_efficiency: must be in (0,1]");
    if (c.n_segments < 1) throw ConfigError(where + ".n_segments: must be >= 1");
    return c;
}

DoubleProbeConfig parse_probe2(const json& j, const std::string& where) {
    check_keys(j,
               {"type", "probe_power_nw", "probe_duration_us", "repump_power_uw",
                "repump_duration_us", "n_shots", "block_size"},
               where);
    DoubleProbeConfig c;
    c.probe_power_nw = num(j, "probe_power_nw", c.probe_power_nw, where);
    c.probe_duration_us = num(j, "probe_duration_us", c.probe_duration_us, where);
    c.repump_power_uw = num(j, "repump_power_uw", c.repump_power_uw, where);
    c.repump_duration_us = num(j, "repump_duration_us", c.repump_duration_us, where);
    c.n_shots = integer(j, "n_shots", c.n_shots, where);
    c.block_size = int(integer(j, "block_size", c.block_size, where));
    if (c.n_shots < 1) throw ConfigError(where + ".n_shots: must be >= 1");
    return c;
}

PumpProbeConfig parse_pump_probe(const json& j, const std::string& where) {
    check_keys(j,
               {"type", "probe_power_nw", "probe_duration_us", "pump_power_uw",
                "pump_duration_us", "n_shots", "block_size"},
               where);
    PumpProbeConfig c;
    c.probe_power_nw = num(j, "probe_power_nw", c.probe_power_nw, where);
    c.probe_duration_us = num(j, "probe_duration_us", c.probe_duration_us, where);
    c.pump_power_uw = num(j, "pump_power_uw", c.pump_power_uw, where);
    c.pump_duration_us = num(j, "pump_duration_us", c.pump_duration_us, where);
    c.n_shots = integer(j, "n_shots", c.n_shots, where);
    c.block_size = int(integer(j, "block_size", c.block_size, where));
    if (c.n_shots < 1) throw ConfigError(where + ".n_shots: must be >= 1");
    return c;
}

CrcSweepConfig parse_crc_sweep(const json& j, const std::string& where) {
    check_keys(j, {"type", "c_pass_values", "ple"}, where);
    CrcSweepConfig c;
    if (j.contains("c_pass_values")) {
        if (!j["c_pass_values"].is_array())
            throw ConfigError(where + ".c_pass_values: expected an array");
        c.c_pass_values.clear();
        for (const auto& v : j["c_pass_values"]) c.c_pass_values.push_back(v.get<std::int64_t>());
        if (c.c_pass_values.empty()) throw ConfigError(where + ".c_pass_values: empty");
    }
    if (j.contains("ple")) c.ple = parse_ple(j["ple"], where + ".ple");
    c.ple.policy = RepumpPolicy::CrcBeforeScan;
    for (auto v : c.c_pass_values) {
        CrcConfig probe = c.ple.crc;
        probe.c_pass = v;
        try {
            probe.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(where + ": c_pass value " + std::to_string(v) + ": " + e.what());
        }
    }
    return c;
}

json emitter_to_json(const RunConfig& cfg) {
    if (!cfg.emitter_preset.empty()) return cfg.emitter_preset;
    const EmitterParams& p = cfg.emitter;
    return json{{"natural_linewidth_mhz", p.natural_linewidth_mhz},
                {"nominal_center_mhz", p.nominal_center_mhz},
                {"inhomogeneous_sigma_mhz", p.inhomogeneous_sigma_mhz},
                {"ionization_yield", p.ionization_yield},
                {"detection_efficiency", p.detection_efficiency},
                {"dark_count_rate_hz", p.dark_count_rate_hz},
                {"saturation_power_nw", p.saturation_power_nw},
                {"pulse_saturation_power_nw", p.pulse_saturation_power_nw},
                {"repump_dose_scale", p.repump_dose_scale},
                {"repump_max_prob", p.repump_max_prob}};
}

json crc_to_json(const CrcConfig& c) {
    return json{{"c_pass", c.c_pass},
                {"c_repump", c.c_repump},
                {"probe_duration_us", c.probe_duration_us},
                {"probe_power_nw", c.probe_power_nw},
                {"repump_duration_us", c.repump_duration_us},
                {"repump_power_uw", c.repump_power_uw},
                {"clock_period_us", c.clock_period_us},
                {"max_attempts", c.max_attempts},
                {"probe_laser_offset_mhz", c.probe_laser_offset_mhz}};
}

json ple_to_json(const PleScanConfig& c) {
    json j{{"type", "ple"},
           {"f_start_mhz", c.f_start_mhz},
           {"f_end_mhz", c.f_end_mhz},
           {"scan_rate_ghz_per_s", c.scan_rate_ghz_per_s},
           {"dwell_us", c.dwell_us},
           {"n_scans", c.n_scans},
           {"probe_power_nw", c.probe_power_nw},
           {"threshold_factor", c.threshold_factor},
           {"repump_power_uw", c.repump_power_uw},
           {"repump_duration_us", c.repump_duration_us},
           {"block_size_scans", c.block_size_scans}};
    switch (c.policy) {
        case RepumpPolicy::None: j["policy"] = "none"; break;
        case RepumpPolicy::ConditionalThreshold: j["policy"] = "conditional_threshold"; break;
        case RepumpPolicy::CrcBeforeScan:
            j["policy"] = "crc_before_scan";
            j["crc"] = crc_to_json(c.crc);
            break;
    }
    if (c.second_emitter)
        j["second_emitter"] = json{{"offset_mhz", c.second_emitter->offset_mhz},
                                   {"relative_strength", c.second_emitter->relative_strength}};
    return j;
}

json experiment_to_json(const RunConfig& cfg) {
    return std::visit(
        [&](const auto& e) -> json {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, PleScanConfig>) {
                return ple_to_json(e);
            } else if constexpr (std::is_same_v<T, DoubleProbeConfig>) {
                return json{{"type", "probe2"},
                            {"probe_power_nw", e.probe_power_nw},
                            {"probe_duration_us", e.probe_duration_us},
                            {"repump_power_uw", e.repump_power_uw},
                            {"repump_duration_us", e.repump_duration_us},
                            {"n_shots", e.n_shots},
                            {"block_size", e.block_size}};
            } else if constexpr (std::is_same_v<T, PumpProbeConfig>) {
                return json{{"type", "pump_probe"},
                            {"probe_power_nw", e.probe_power_nw},
                            {"probe_duration_us", e.probe_duration_us},
                            {"pump_power_uw", e.pump_power_uw},
                            {"pump_duration_us", e.pump_duration_us},
                            {"n_shots", e.n_shots},
                            {"block_size", e.block_size}};
            } else if constexpr (std::is_same_v<T, RabiConfig>) {
                return json{{"type", "rabi"},
                            {"crc", crc_to_json(e.probe)},
                            {"live_crc", e.live_crc},
                            {"pulse_power_nw", e.pulse_power_nw},
                            {"pulse_duration_ns", e.pulse_duration_ns},
                            {"bin_width_ns", e.bin_width_ns},
                            {"n_reps", e.n_reps},
                            {"n_sequences", e.n_sequences},
                            {"interval_edges", e.interval_edges},
                            {"block_size", e.block_size}};
            } else if constexpr (std::is_same_v<T, RamseyConfig>) {
                return json{{"type", "ramsey"},
                            {"crc", crc_to_json(e.crc)},
                            {"tau_grid_ns", e.tau_grid_ns.empty() ? RamseyConfig::default_grid()
                                                                  : e.tau_grid_ns},
                            {"n_phases", e.n_phases},
                            {"n_heralds_per_point", e.n_heralds_per_point},
                            {"n_reps_per_herald", e.n_reps_per_herald},
                            {"readout_window_ns", e.readout_window_ns},
                            {"ideal_pulses", e.ideal_pulses},
                            {"pulse_rabi_mhz", e.pulse_rabi_mhz},
                            {"include_decay", e.include_decay},
                            {"mixed_tau_ns", e.mixed_tau_ns}};
            } else if constexpr (std::is_same_v<T, G2Config>) {
                return json{{"type", "g2"},
                            {"power_nw", e.power_nw},
                            {"duration_s", e.duration_s},
                            {"collection_efficiency", e.collection_efficiency},
                            {"bin_width_ns", e.bin_width_ns},
                            {"max_tau_ns", e.max_tau_ns},
                            {"background_fraction", e.background_fraction},
                            {"n_segments", e.n_segments}};
            } else {
                return json{{"type", "crc_sweep"},
                            {"c_pass_values", e.c_pass_values},
                            {"ple", ple_to_json(e.ple)}};
            }
        },
        cfg.experiment);
}

}  // namespace

const char* RunConfig::experiment_type() const {
    return std::visit(
        [](const auto& e) -> const char* {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, PleScanConfig>) return "ple";
            else if constexpr (std::is_same_v<T, DoubleProbeConfig>) return "probe2";
            else if constexpr (std::is_same_v<T, PumpProbeConfig>) return "pump_probe";
            else if constexpr (std::is_same_v<T, RabiConfig>) return "rabi";
            else if constexpr (std::is_same_v<T, RamseyConfig>) return "ramsey";
            else if constexpr (std::is_same_v<T, G2Config>) return "g2";
            else return "crc_sweep";
        },
        experiment);
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: not valid JSON: ") + e.what());
    }
    check_keys(j, {"seed", "workers", "out", "emitter", "experiment"}, "config");

    RunConfig cfg;
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            throw ConfigError("config.seed: expected an unsigned integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    cfg.n_workers = int(integer(j, "workers", cfg.n_workers, "config"));
    if (cfg.n_workers < 1) throw ConfigError("config.workers: must be >= 1");
    if (j.contains("out")) cfg.output_path = j["out"].get<std::string>();
    if (j.contains("emitter")) cfg.emitter = parse_emitter(j["emitter"], &cfg.emitter_preset);

    if (!j.contains("experiment"))
        throw ConfigError("config.experiment: missing (exactly one experiment is required)");
    const json& e = j["experiment"];
    if (!e.is_object() || !e.contains("type"))
        throw ConfigError("config.experiment.type: missing experiment type");
    const std::string type = e["type"].get<std::string>();
    if (type == "ple")
        cfg.experiment = parse_ple(e, "experiment");
    else if (type == "probe2")
        cfg.experiment = parse_probe2(e, "experiment");
    else if (type == "pump_probe")
        cfg.experiment = parse_pump_probe(e, "experiment");
    else if (type == "rabi")
        cfg.experiment = parse_rabi(e, "experiment");
    else if (type == "ramsey")
        cfg.experiment = parse_ramsey(e, "experiment");
    else if (type == "g2")
        cfg.experiment = parse_g2(e, "experiment");
    else if (type == "crc_sweep")
        cfg.experiment = parse_crc_sweep(e, "experiment");
    else
        throw ConfigError("config.experiment.type: unknown type '" + type + "'");
    return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
    json j{{"seed", cfg.seed},
           {"workers", cfg.n_workers},
           {"out", cfg.output_path},
           {"emitter", emitter_to_json(cfg)},
           {"experiment", experiment_to_json(cfg)}};
    return j.dump(2);
}

std::uint64_t config_hash(const RunConfig& cfg) {
    // seed and output path identify the run, not the experiment; hash the rest
    json j{{"emitter", emitter_to_json(cfg)}, {"experiment", experiment_to_json(cfg)}};
    const std::string s = j.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace snvsim
