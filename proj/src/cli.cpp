#include "snvsim/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "snvsim/pipeline.hpp"

namespace snvsim {

namespace {

struct CommonArgs {
    std::string config_path = "default";
    std::uint64_t seed = 1;
    bool seed_given = false;
    std::string out;
    int workers = 1;
    std::optional<std::int64_t> c_pass, c_repump;
    std::optional<double> probe_offset_mhz, power_nw;
    std::optional<std::int64_t> shots;
    std::optional<int> scans;
    std::optional<std::string> emitter;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config_path,
                    "run configuration file, or 'default' for the built-in");
    cmd->add_option("--seed", a.seed, "base RNG seed")->check(CLI::NonNegativeNumber);
    cmd->add_option("--out", a.out, "output record file path");
    cmd->add_option("--workers", a.workers, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--c-pass", a.c_pass, "CRC pass threshold override");
    cmd->add_option("--c-repump", a.c_repump, "CRC repump threshold override");
    cmd->add_option("--probe-offset-mhz", a.probe_offset_mhz, "CRC probe laser offset override");
    cmd->add_option("--power-nw", a.power_nw, "probe/drive power override (nW)");
    cmd->add_option("--shots", a.shots, "shot count override");
    cmd->add_option("--scans", a.scans, "scan count override");
    cmd->add_option("--emitter", a.emitter, "emitter preset override (snv_a, snv_b)");
}

RunConfig load_config(const std::string& type, const CommonArgs& a, bool seed_given) {
    RunConfig cfg;
    if (a.config_path == "default") {
        cfg = default_run_config(type);
    } else {
        std::ifstream in(a.config_path);
        if (!in) throw ConfigError("cannot open config file: " + a.config_path);
        std::ostringstream ss;
        ss << in.rdbuf();
        cfg = parse_config(ss.str());
        if (std::string(cfg.experiment_type()) != type)
            throw ConfigError("config experiment type '" + std::string(cfg.experiment_type()) +
                              "' does not match subcommand '" + type + "'");
    }
    if (seed_given) cfg.seed = a.seed;
    cfg.n_workers = a.workers;
    if (!a.out.empty()) cfg.output_path = a.out;
    if (a.emitter) {
        cfg.emitter = EmitterParams::preset(*a.emitter);
        cfg.emitter_preset = *a.emitter;
    }

    std::visit(
        [&](auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, DoubleProbeConfig> ||
                          std::is_same_v<T, PumpProbeConfig>) {
                if (a.shots) e.n_shots = *a.shots;
                if (a.power_nw) e.probe_power_nw = *a.power_nw;
            } else if constexpr (std::is_same_v<T, PleScanConfig>) {
                if (a.scans) e.n_scans = *a.scans;
                if (a.power_nw) e.probe_power_nw = *a.power_nw;
                if (a.c_pass) e.crc.c_pass = *a.c_pass;
                if (a.c_repump) e.crc.c_repump = *a.c_repump;
                if (a.probe_offset_mhz) e.crc.probe_laser_offset_mhz = *a.probe_offset_mhz;
            } else if constexpr (std::is_same_v<T, RabiConfig>) {
                if (a.shots) e.n_sequences = *a.shots;
                if (a.c_pass) e.probe.c_pass = *a.c_pass;
                if (a.c_repump) e.probe.c_repump = *a.c_repump;
                if (a.probe_offset_mhz) e.probe.probe_laser_offset_mhz = *a.probe_offset_mhz;
                if (a.power_nw) e.pulse_power_nw = *a.power_nw;
            } else if constexpr (std::is_same_v<T, RamseyConfig>) {
                if (a.shots) e.n_heralds_per_point = *a.shots;
                if (a.c_pass) e.crc.c_pass = *a.c_pass;
                if (a.c_repump) e.crc.c_repump = *a.c_repump;
                if (a.probe_offset_mhz) e.crc.probe_laser_offset_mhz = *a.probe_offset_mhz;
            } else if constexpr (std::is_same_v<T, G2Config>) {
                if (a.power_nw) e.power_nw = *a.power_nw;
            } else if constexpr (std::is_same_v<T, CrcSweepConfig>) {
                if (a.scans) e.ple.n_scans = *a.scans;
                if (a.c_repump) e.ple.crc.c_repump = *a.c_repump;
                if (a.probe_offset_mhz) e.ple.crc.probe_laser_offset_mhz = *a.probe_offset_mhz;
            }
        },
        cfg.experiment);

    // revalidate after overrides
    std::visit(
        [](auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, PleScanConfig>) {
                e.validate();
            } else if constexpr (std::is_same_v<T, RabiConfig>) {
                e.probe.validate();
            } else if constexpr (std::is_same_v<T, RamseyConfig>) {
                e.crc.validate();
            } else if constexpr (std::is_same_v<T, CrcSweepConfig>) {
                e.ple.crc.validate();
            }
        },
        cfg.experiment);
    return cfg;
}

std::string default_out_name(const std::string& kind) { return kind + ".tsv"; }

}  // namespace

int cli_main(const std::vector<std::string>& args) {
    CLI::App app{"Monte Carlo simulator of a resonantly driven quantum emitter with "
                 "charge-resonance-check heralding"};
    app.require_subcommand(1);

    // ------------------------------------------------------------ simulate
    CLI::App* sim = app.add_subcommand("simulate", "run an experiment and write records");
    sim->require_subcommand(1);
    static const char* kinds[] = {"ple", "probe2", "pump-probe", "rabi",
                                  "ramsey", "g2", "crc-sweep"};
    static const char* types[] = {"ple", "probe2", "pump_probe", "rabi",
                                  "ramsey", "g2", "crc_sweep"};
    CommonArgs sim_args[7];
    CLI::App* sim_cmds[7];
    for (int i = 0; i < 7; ++i) {
        sim_cmds[i] = sim->add_subcommand(kinds[i]);
        add_common(sim_cmds[i], sim_args[i]);
    }

    // ------------------------------------------------------------- analyze
    CLI::App* analyze = app.add_subcommand("analyze", "fit or summarize a record file");
    analyze->require_subcommand(1);
    CLI::App* afit = analyze->add_subcommand("fit", "model fits for the input schema");
    CLI::App* astats = analyze->add_subcommand("stats", "summary statistics");
    std::string a_in, a_out;
    double a_window = 0.0;
    std::int64_t a_threshold = 100;
    bool a_window_given = false;
    for (CLI::App* c : {afit, astats}) {
        c->add_option("--in", a_in, "input record file")->required();
        c->add_option("--out", a_out, "output file");
    }
    afit->add_option("--window-mhz", a_window, "dominant-peak fit window")
        ->each([&](const std::string&) { a_window_given = true; });
    astats->add_option("--threshold", a_threshold, "pair conditioning threshold");

    // -------------------------------------------------------------- report
    CLI::App* report = app.add_subcommand("report", "plot-ready data for a figure panel");
    report->require_subcommand(1);
    CLI::App* fig = report->add_subcommand("figure", "named panel");
    std::string fig_name;
    CommonArgs fig_args;
    fig->add_option("panel", fig_name, "panel name: 1d 2b 2c 2d 3c 4b 4c 4e 5b 5c")->required();
    add_common(fig, fig_args);

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("snvsim");
    for (const auto& s : args) argv.push_back(s.c_str());

    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        std::ostringstream dummy;
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        for (int i = 0; i < 7; ++i) {
            if (!sim_cmds[i]->parsed()) continue;
            const bool seed_given = sim_cmds[i]->count("--seed") > 0;
            RunConfig cfg = load_config(types[i], sim_args[i], seed_given);
            if (cfg.output_path.empty() || (sim_args[i].out.empty() && cfg.output_path == "out.tsv"))
                cfg.output_path = default_out_name(types[i]);
            const RecordFile rec = run_and_record(cfg);
            rec.save(cfg.output_path);
            std::cout << cfg.output_path << "\n";
            return 0;
        }

        if (afit->parsed() || astats->parsed()) {
            RecordFile in;
            try {
                in = RecordFile::load(a_in);
            } catch (const std::exception& e) {
                throw ConfigError(std::string("analyze: bad input: ") + e.what());
            }
            AnalyzeOptions opts;
            if (a_window_given) opts.window_mhz = a_window;
            opts.threshold = a_threshold;
            const RecordFile out = afit->parsed() ? analyze_fit(in, opts)
                                                  : analyze_stats(in, opts);
            const std::string path =
                !a_out.empty() ? a_out : (afit->parsed() ? "fits.tsv" : "stats.tsv");
            out.save(path);
            std::cout << path << "\n";
            return 0;
        }

        if (fig->parsed()) {
            const RecordFile out = report_figure(fig_name, fig_args.seed, fig_args.workers);
            const std::string path =
                !fig_args.out.empty() ? fig_args.out : ("figure_" + fig_name + ".tsv");
            out.save(path);
            std::cout << path << "\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace snvsim
