#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "snvsim/bloch.hpp"
#include "snvsim/cli.hpp"
#include "snvsim/crc.hpp"
#include "snvsim/experiments.hpp"
#include "snvsim/fit.hpp"
#include "snvsim/pipeline.hpp"
#include "snvsim/stats.hpp"

namespace py = pybind11;
using namespace snvsim;

namespace {

py::dict fit_to_dict(const FitResult& fr) {
    py::dict d;
    py::dict params, errs;
    for (size_t i = 0; i < fr.names.size(); ++i) {
        params[py::str(fr.names[i])] = fr.params[i];
        errs[py::str(fr.names[i])] = fr.stderrs[i];
    }
    d["params"] = params;
    d["stderr"] = errs;
    d["converged"] = fr.converged;
    d["n_iter"] = fr.n_iter;
    d["residual_norm"] = fr.residual_norm;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Monte Carlo simulation of a resonantly driven quantum emitter with "
              "charge-resonance-check heralding";

    py::class_<EmitterParams>(m, "EmitterParams")
        .def(py::init<>())
        .def_static("snv_a", &EmitterParams::snv_a)
        .def_static("snv_b", &EmitterParams::snv_b)
        .def_readwrite("natural_linewidth_mhz", &EmitterParams::natural_linewidth_mhz)
        .def_readwrite("inhomogeneous_sigma_mhz", &EmitterParams::inhomogeneous_sigma_mhz)
        .def_readwrite("ionization_yield", &EmitterParams::ionization_yield)
        .def_readwrite("detection_efficiency", &EmitterParams::detection_efficiency)
        .def_readwrite("dark_count_rate_hz", &EmitterParams::dark_count_rate_hz)
        .def_readwrite("saturation_power_nw", &EmitterParams::saturation_power_nw)
        .def_readwrite("pulse_saturation_power_nw", &EmitterParams::pulse_saturation_power_nw)
        .def_readwrite("repump_dose_scale", &EmitterParams::repump_dose_scale)
        .def_readwrite("repump_max_prob", &EmitterParams::repump_max_prob)
        .def("validate", &EmitterParams::validate);

    py::class_<RngStream>(m, "RngStream")
        .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"), py::arg("stream"))
        .def("uniform", &RngStream::uniform)
        .def("normal", &RngStream::normal, py::arg("mean") = 0.0, py::arg("sigma") = 1.0)
        .def("poisson", &RngStream::poisson, py::arg("mean"))
        .def("u64", &RngStream::u64);

    m.def("derive_stream", &derive_stream, py::arg("seed"), py::arg("stream_index"));

    m.def("scattering_rate", &scattering_rate, py::arg("delta_mhz"), py::arg("s"),
          py::arg("params"), "steady-state emitted photon rate (photons/s)");
    m.def(
        "sample_counts",
        [](double rate, double duration_us, const EmitterParams& p, RngStream& rng) {
            return sample_counts(rate, duration_us, p, rng);
        },
        py::arg("emitted_rate_per_s"), py::arg("duration_us"), py::arg("params"), py::arg("rng"));
    m.def("g2_analytic", &g2_analytic, py::arg("tau_ns"), py::arg("gamma_rad_ns"),
          py::arg("omega_rad_ns"));

    py::enum_<Charge>(m, "Charge").value("Bright", Charge::Bright).value("Dark", Charge::Dark);

    py::class_<EmitterState>(m, "EmitterState")
        .def(py::init<>())
        .def_static("bright", &EmitterState::bright, py::arg("center_mhz") = 0.0)
        .def_static("dark", &EmitterState::dark)
        .def_readwrite("charge", &EmitterState::charge)
        .def_readwrite("center_detuning_mhz", &EmitterState::center_detuning_mhz)
        .def_property_readonly("rho_ee", [](const EmitterState& s) { return s.rho.ee; });

    py::class_<CrcConfig>(m, "CrcConfig")
        .def(py::init<>())
        .def_readwrite("c_pass", &CrcConfig::c_pass)
        .def_readwrite("c_repump", &CrcConfig::c_repump)
        .def_readwrite("probe_duration_us", &CrcConfig::probe_duration_us)
        .def_readwrite("probe_power_nw", &CrcConfig::probe_power_nw)
        .def_readwrite("repump_duration_us", &CrcConfig::repump_duration_us)
        .def_readwrite("repump_power_uw", &CrcConfig::repump_power_uw)
        .def_readwrite("clock_period_us", &CrcConfig::clock_period_us)
        .def_readwrite("max_attempts", &CrcConfig::max_attempts)
        .def_readwrite("probe_laser_offset_mhz", &CrcConfig::probe_laser_offset_mhz);

    py::class_<CrcOutcome>(m, "CrcOutcome")
        .def_readonly("heralded", &CrcOutcome::heralded)
        .def_readonly("attempts", &CrcOutcome::attempts)
        .def_readonly("repumps", &CrcOutcome::repumps)
        .def_readonly("final_counts", &CrcOutcome::final_counts)
        .def_readonly("heralded_detuning_mhz", &CrcOutcome::heralded_detuning_mhz)
        .def_readonly("elapsed_us", &CrcOutcome::elapsed_us);

    m.def(
        "crc_run",
        [](EmitterState& st, const CrcConfig& c, const EmitterParams& p, RngStream& rng) {
            return crc_run(st, c, p, rng);
        },
        py::arg("state"), py::arg("config"), py::arg("params"), py::arg("rng"));
    m.def(
        "classify_counts",
        [](std::int64_t counts, const CrcConfig& c) {
            switch (classify_counts(counts, c)) {
                case CrcDecision::Pass: return "pass";
                case CrcDecision::Retry: return "retry";
                default: return "repump";
            }
        },
        py::arg("counts"), py::arg("config"));

    py::class_<DoubleProbeConfig>(m, "DoubleProbeConfig")
        .def(py::init<>())
        .def_readwrite("probe_power_nw", &DoubleProbeConfig::probe_power_nw)
        .def_readwrite("probe_duration_us", &DoubleProbeConfig::probe_duration_us)
        .def_readwrite("repump_power_uw", &DoubleProbeConfig::repump_power_uw)
        .def_readwrite("repump_duration_us", &DoubleProbeConfig::repump_duration_us)
        .def_readwrite("n_shots", &DoubleProbeConfig::n_shots);

    m.def(
        "run_double_probe",
        [](const DoubleProbeConfig& cfg, const EmitterParams& p, std::uint64_t seed,
           int workers) {
            py::list out;
            for (const PairShot& s : run_double_probe(cfg, p, seed, workers))
                out.append(py::make_tuple(s.c_first, s.c_second, s.ion_first, s.ion_second));
            return out;
        },
        py::arg("config"), py::arg("params"), py::arg("seed"), py::arg("workers") = 1);

    m.def(
        "fit_damped_sine",
        [](const std::vector<double>& ts, const std::vector<double>& ys) {
            return fit_to_dict(fit_damped_sine(ts, ys));
        },
        py::arg("t"), py::arg("y"));
    m.def(
        "fit_lorentzian_peak",
        [](const std::vector<double>& xs, const std::vector<double>& ys) {
            return fit_to_dict(fit_lorentzian_peak(xs, ys));
        },
        py::arg("x"), py::arg("y"));
    m.def(
        "fit_phase_fringe",
        [](const std::vector<double>& phis, const std::vector<double>& ys) {
            return fit_to_dict(fit_phase_fringe(phis, ys));
        },
        py::arg("phi"), py::arg("y"));
    m.def(
        "fit_gaussian_envelope",
        [](const std::vector<double>& taus, const std::vector<double>& amps) {
            return fit_to_dict(fit_gaussian_envelope(taus, amps));
        },
        py::arg("tau"), py::arg("amplitude"));

    m.def(
        "cli_main", [](const std::vector<std::string>& args) { return cli_main(args); },
        py::arg("args"), "run the command-line interface in-process");

    m.attr("__version__") = "1.0.0";
}
