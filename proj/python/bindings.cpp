#include "cqed/config.hpp"
#include "cqed/coupled_oscillator.hpp"
#include "cqed/errors.hpp"
#include "cqed/hbt.hpp"
#include "cqed/lindblad.hpp"
#include "cqed/spectral_fit.hpp"
#include "cqed/trajectory.hpp"

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace cqed;

namespace {

SystemParams device(double detuning, double coupling, double gamma_c, double exciton_lifetime, double cavity_nm)
{
    const Energy ec = wavelength_to_energy(Wavelength{cavity_nm});
    return SystemParams{Energy{ec.value + detuning}, ec, lifetime_to_linewidth(Duration{exciton_lifetime}),
                        Energy{gamma_c}, Energy{coupling}};
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Cavity-QED forward model: normal modes, master equation, photon streams and analysis";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
    py::register_exception<StatisticsError>(m, "StatisticsError", PyExc_RuntimeError);

    m.def("wavelength_to_energy", [](double nm) { return wavelength_to_energy(Wavelength{nm}).value; }, py::arg("nm"));
    m.def("energy_to_wavelength", [](double uev) { return energy_to_wavelength(Energy{uev}).value; }, py::arg("ueV"));
    m.def("linewidth_to_lifetime", [](double uev) { return linewidth_to_lifetime(Energy{uev}).value; },
          py::arg("ueV"));
    m.def("lifetime_to_linewidth", [](double ps) { return lifetime_to_linewidth(Duration{ps}).value; },
          py::arg("ps"));


    m.def(
        "eigen_energies",
        [](double d, double g, double gc, double tx, double nm) {
            const EigenPair e = eigen_energies(device(d, g, gc, tx, nm));
            return py::make_tuple(e.upper, e.lower);
        },
        "Complex (upper, lower) normal-mode energies in ueV.", py::arg("detuning_ueV") = 0.0,
        py::arg("coupling_ueV") = 35.0, py::arg("gamma_c_ueV") = 85.0, py::arg("exciton_lifetime_ps") = 700.0,
        py::arg("cavity_nm") = 936.35);
    m.def(
        "vacuum_rabi_splitting",
        [](double g, double gc, double tx) { return vacuum_rabi_splitting(device(0.0, g, gc, tx, 936.35)).value; },
        py::arg("coupling_ueV") = 35.0, py::arg("gamma_c_ueV") = 85.0, py::arg("exciton_lifetime_ps") = 700.0);
    m.def(
        "figures_of_merit",
        [](double g, double gc, double tx) {
            const auto f = figures_of_merit(Energy{g}, Energy{gc}, lifetime_to_linewidth(Duration{tx}));
            py::dict d;
            d["purcell"] = f.purcell;
            d["efficiency"] = f.efficiency;
            d["strongly_coupled"] = f.strongly_coupled;
            d["rabi_splitting_ueV"] = f.rabi_splitting.value;
            return d;
        },
        py::arg("coupling_ueV") = 35.0, py::arg("gamma_c_ueV") = 85.0, py::arg("exciton_lifetime_ps") = 700.0);
    m.def(
        "exciton_branch_lifetime",
        [](double d, double g, double gc, double tx) {
            return exciton_branch_lifetime(device(d, g, gc, tx, 936.35)).value;
        },
        py::arg("detuning_ueV"), py::arg("coupling_ueV") = 35.0, py::arg("gamma_c_ueV") = 85.0,
        py::arg("exciton_lifetime_ps") = 700.0);
    m.def(
        "infer_bare_lifetime",
        [](double measured, double d, double g, double gc) {
            return infer_bare_lifetime(Duration{measured}, Energy{d}, Energy{g}, Energy{gc}).value;
        },
        py::arg("measured_ps"), py::arg("detuning_ueV"), py::arg("coupling_ueV") = 35.0,
        py::arg("gamma_c_ueV") = 85.0);
    m.def(
        "coupling_from_splitting",
        [](double s, double gc, double gx) {
            return coupling_from_splitting(Energy{s}, Energy{gc}, Energy{gx}).value;
        },
        py::arg("splitting_ueV"), py::arg("gamma_c_ueV"), py::arg("gamma_x_ueV"));

    m.def(
        "cw_g2",
        [](const std::vector<double>& tau, const std::string& channel, double pump, double d, int n_max) {
            LindbladModel model;
            model.device = device(d, 35.0, 85.0, 700.0, 936.35);
            model.exciton_pump = pump;
            model.hilbert.n_max = n_max;
            return cw_g2(model, channel == "X" ? Channel::X : Channel::C, tau).g2;
        },
        "Stationary g2(tau) of the reference device under weak incoherent pumping.", py::arg("tau_ps"),
        py::arg("channel") = "C", py::arg("exciton_pump_per_ps") = 1e-4, py::arg("detuning_ueV") = 0.0,
        py::arg("n_max") = 2);

    m.def(
        "simulate",
        [](const std::string& config_json, std::optional<double> duration_ps, unsigned threads) {
            const RunConfig cfg = parse_run_config(config_json);
            SimulationOptions opt;
            opt.threads = threads;
            opt.config_hash = config_hash(cfg);
            ClickStream s;
            {
                py::gil_scoped_release release;
                const LindbladModel model = cfg.device.model();
                const PumpSchedule pump = cfg.resolved_pump();
                validate_schedule(model, pump);
                s = simulate_stream(model, pump, cfg.detectors, duration_ps.value_or(cfg.analysis.duration_ps),
                                    cfg.seed, opt);
            }
            std::vector<double> t;
            std::string ch;
            t.reserve(s.clicks.size());
            for (const auto& c : s.clicks) {
                t.push_back(c.time_ps);
                ch.push_back(static_cast<char>(c.channel));
            }
            py::dict d;
            d["times_ps"] = t;
            d["channels"] = ch;
            d["duration_ps"] = s.duration_ps;
            d["seed"] = s.seed;
            d["confighash"] = s.config_hash;
            return d;
        },
        "Click stream for a JSON run config.", py::arg("config_json") = "{}", py::arg("duration_ps") = py::none(),
        py::arg("threads") = 1u);

    m.def(
        "pulsed_g2",
        [](const std::vector<double>& a, const std::vector<double>& b, double duration, double rep, int n_side,
           double bin) {
            const bool autoc = &a == &b || a == b;
            const auto h = correlate(a, b, duration, (n_side + 0.5) * rep + bin, bin, autoc);
            const G2Estimate g = autoc ? pulsed_g2_zero(h, rep, n_side) : cross_g2_zero(h, rep, n_side);
            return py::make_tuple(g.value, g.error);
        },
        "Pulsed g2(0) and its standard error from sorted click times.", py::arg("times_a"), py::arg("times_b"),
        py::arg("duration_ps"), py::arg("rep_period_ps") = 13000.0, py::arg("n_side") = 10,
        py::arg("bin_ps") = 128.0);

    m.def(
        "fit_synthetic_series",
        [](std::uint64_t seed, double noise, double pitch_nm) {
            SeriesOptions opt;
            opt.seed = seed;
            opt.noise = noise;
            opt.pitch_nm = pitch_nm;
            const auto c = fit_series(synthetic_series(opt)).coupling;
            py::dict d;
            d["coupling_ueV"] = c.coupling;
            d["coupling_error"] = c.coupling_error;
            d["gamma_c_ueV"] = c.gamma_c;
            d["gamma_x_ueV"] = c.gamma_x;
            d["splitting_ueV"] = c.splitting;
            d["resonance_K"] = c.resonance_K;
            d["strongly_coupled"] = c.strongly_coupled;
            return d;
        },
        "Simulates a temperature series of the reference device and extracts the coupling.", py::arg("seed") = 1,
        py::arg("noise") = 0.05, py::arg("pitch_nm") = 0.03 / 8.0);
}
