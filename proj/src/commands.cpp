#include "cqed/commands.hpp"

#include "cqed/errors.hpp"
#include "cqed/hbt.hpp"
#include "cqed/scenarios.hpp"
#include "cqed/spectral_fit.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace cqed {

namespace {

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void kv(std::ostream& out, const std::string& key, double v)
{
    out << key << '=' << fmt("%.10g", v) << '\n';
}

void provenance(std::ostream& out, const RunConfig& cfg)
{
    out << "confighash=" << config_hash(cfg) << '\n' << "seed=" << cfg.seed << '\n';
}

// Library precondition failures surface as configuration errors.
template <class Fn>
auto as_config_error(Fn&& fn)
{
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace

void cmd_eigen(const RunConfig& cfg, std::ostream& out)
{
    const SystemParams p = as_config_error([&] { return cfg.device.params(); });
    const EigenPair e = eigen_energies(p);
    const FiguresOfMerit fom = figures_of_merit(p.coupling, p.gamma_c, p.gamma_x);
    std::ostringstream r;
    provenance(r, cfg);
    kv(r, "detuning_ueV", p.detuning().value);
    kv(r, "upper_energy_ueV", e.upper.real());
    kv(r, "upper_fwhm_ueV", fwhm_of(e.upper));
    r << "upper_character=" << to_string(e.upper_character) << '\n';
    kv(r, "lower_energy_ueV", e.lower.real());
    kv(r, "lower_fwhm_ueV", fwhm_of(e.lower));
    r << "lower_character=" << to_string(e.lower_character) << '\n';
    r << "coupling_regime=" << (fom.strongly_coupled ? "strong coupling" : "weak coupling") << '\n';
    if (fom.strongly_coupled)
        kv(r, "vacuum_rabi_splitting_ueV", fom.rabi_splitting.value);
    kv(r, "g_over_gamma_c", p.coupling.value / p.gamma_c.value);
    kv(r, "purcell_factor", fom.purcell);
    kv(r, "quantum_efficiency", fom.efficiency);
    kv(r, "cavity_q", q_factor(p.cavity, p.gamma_c));
    try {
        kv(r, "exciton_branch_lifetime_ps", exciton_branch_lifetime(p).value);
    } catch (const std::domain_error&) {
        r << "exciton_branch_lifetime_ps=undefined\n";
    }
    out << r.str();
}

void cmd_sweep(const RunConfig& cfg, std::ostream& out)
{
    const auto& a = cfg.analysis;
    const auto& d = cfg.device;
    std::ostringstream r;
    r << "# confighash=" << config_hash(cfg) << " seed=" << cfg.seed << '\n';
    r << "T_K,lambda_upper_nm,lambda_lower_nm,fwhm_upper_ueV,fwhm_lower_ueV\n";
    const auto n = static_cast<long>(std::floor((a.t_max_K - a.t_min_K) / a.t_step_K + 1e-9));
    for (long k = 0; k <= n; ++k) {
        const double T = a.t_min_K + static_cast<double>(k) * a.t_step_K;
        const SystemParams p = device_at(Temperature{T}, d.tuning, Energy{d.coupling_ueV}, Energy{d.gamma_c_ueV},
                                         lifetime_to_linewidth(Duration{d.exciton_lifetime_ps}));
        const EigenPair e = eigen_energies(p);
        r << fmt("%.3f", T) << ',' << fmt("%.9f", energy_to_wavelength(Energy{e.upper.real()}).value) << ','
          << fmt("%.9f", energy_to_wavelength(Energy{e.lower.real()}).value) << ','
          << fmt("%.9g", fwhm_of(e.upper)) << ',' << fmt("%.9g", fwhm_of(e.lower)) << '\n';
    }
    out << r.str();
}

std::size_t cmd_simulate(const RunConfig& cfg, unsigned threads, const std::string& path,
                         std::optional<double> duration_ps, std::ostream& out)
{
    const LindbladModel model = cfg.device.model();
    const PumpSchedule pump = cfg.resolved_pump();
    validate_schedule(model, pump);
    cfg.detectors.validate();
    SimulationOptions opt;
    opt.threads = threads;
    opt.config_hash = config_hash(cfg);
    const double duration = duration_ps.value_or(cfg.analysis.duration_ps);
    const ClickStream s = simulate_stream(model, pump, cfg.detectors, duration, cfg.seed, opt);
    write_click_stream(path, s);
    std::ostringstream r;
    provenance(r, cfg);
    r << "output=" << path << '\n';
    kv(r, "duration_ps", duration);
    kv(r, "background_feed_rate_per_ps", pump.background_feed_rate);
    r << "clicks_C=" << s.count(ClickChannel::C) << '\n'
      << "clicks_X=" << s.count(ClickChannel::X) << '\n'
      << "clicks_D=" << s.count(ClickChannel::D) << '\n';
    out << r.str();
    return s.clicks.size();
}

void cmd_correlate(const CorrelateOptions& opt, std::ostream& out)
{
    if (opt.files.empty())
        throw ConfigError("correlate: no input files");
    const std::string ca = parse_channel_set(opt.channels_a);
    const std::string cb = opt.channels_b.empty() ? ca : parse_channel_set(opt.channels_b);
    const double window = opt.window_ps.value_or(opt.rep_period_ps ? 13.0 * *opt.rep_period_ps
                                                                    : 1000.0 * opt.bin_width_ps);
    std::optional<CorrelationHistogram> total;
    std::size_t dark = 0;
    double duration = 0.0;
    std::string hash, seeds;
    for (const auto& f : opt.files) {
        const ClickStream s = read_click_stream(f);
        const auto h = correlate(s, ca, cb, window, opt.bin_width_ps);
        total = total ? merge(*total, h) : h;
        dark += s.count(ClickChannel::D);
        duration += s.duration_ps;
        hash += (hash.empty() ? "" : ",") + s.config_hash;
        seeds += (seeds.empty() ? "" : ",") + std::to_string(s.seed);
    }
    CorrelationHistogram h = *total;
    if (opt.dark_subtract) {
        const double dark_rate = static_cast<double>(dark) / duration;
        const double da = ca.find('D') != std::string::npos ? dark_rate : 0.0;
        const double db = cb.find('D') != std::string::npos ? dark_rate : 0.0;
        h = subtract_dark_counts(h, da, db);
    }
    const G2Estimate g = opt.rep_period_ps ? pulsed_g2_zero(h, *opt.rep_period_ps, opt.n_side) : cw_g2_zero(h);
    if (!opt.histogram_path.empty()) {
        std::ofstream hf(opt.histogram_path);
        if (!hf)
            throw ConfigError("cannot write " + opt.histogram_path);
        hf << "# confighash=" << hash << " seed=" << seeds << '\n';
        write_histogram_csv(hf, h);
    }
    std::ostringstream r;
    r << "confighash=" << hash << '\n' << "seed=" << seeds << '\n';
    r << "channels=" << ca << (ca == cb ? "" : "|" + cb) << '\n';
    kv(r, "g2_zero", g.value);
    kv(r, "g2_zero_error", g.error);
    r << "method=" << to_string(g.method) << '\n';
    kv(r, "bin_width_ps", h.bin_width_ps);
    kv(r, "window_ps", h.reach_ps());
    r << "singles_a=" << h.singles_a << '\n' << "singles_b=" << h.singles_b << '\n';
    kv(r, "pairs", h.total());
    r << "dark_subtracted=" << (opt.dark_subtract ? "true" : "false") << '\n';
    out << r.str();
}

void cmd_fit(const std::vector<std::string>& files, std::ostream& out)
{
    if (files.empty())
        throw ConfigError("fit: no spectrum files");
    std::vector<Spectrum> spectra;
    for (const auto& f : files)
        spectra.push_back(as_config_error([&] { return read_spectrum_csv(f); }));
    std::ostringstream r;
    if (spectra.size() == 1) {
        const FitResult f = fit_double_lorentzian(spectra[0], initial_guess(spectra[0]));
        write_fit_report(r, f);
        if (!f.converged)
            throw ConvergenceError("fit did not converge in 200 iterations\n" + r.str());
    } else {
        const SeriesFit s = fit_series(spectra);
        for (const auto& f : s.fits)
            if (!f.converged)
                throw ConvergenceError("fit at " + fmt("%.2f", f.temperature_K.value_or(0.0)) +
                                       " K did not converge");
        r << "spectra=" << s.fits.size() << '\n';
        write_coupling_report(r, s.coupling);
    }
    out << r.str();
}

std::vector<std::string> cmd_spectra(const RunConfig& cfg, const std::string& dir, double noise, double pitch_nm,
                                     std::ostream& out)
{
    SeriesOptions o;
    o.coupling = Energy{cfg.device.coupling_ueV};
    o.gamma_c = Energy{cfg.device.gamma_c_ueV};
    o.gamma_x = lifetime_to_linewidth(Duration{cfg.device.exciton_lifetime_ps});
    o.calib = cfg.device.tuning;
    o.noise = noise;
    o.pitch_nm = pitch_nm;
    o.seed = cfg.seed;
    const auto spectra = as_config_error([&] { return synthetic_series(o); });
    std::filesystem::create_directories(dir);
    std::vector<std::string> paths;
    for (const auto& s : spectra) {
        const auto path = (std::filesystem::path(dir) / ("spectrum_" + fmt("%05.2f", *s.temperature_K) + "K.csv"))
                              .string();
        std::ofstream f(path);
        if (!f)
            throw ConfigError("cannot write " + path);
        write_spectrum_csv(f, s);
        paths.push_back(path);
    }
    std::ostringstream r;
    provenance(r, cfg);
    for (const auto& p : paths)
        r << "spectrum=" << p << '\n';
    out << r.str();
    return paths;
}

namespace {

struct Row {
    std::string name;
    std::string reference;
    double value;
    double lo;
    double hi;
};

}  // namespace

int cmd_demo(const RunConfig& cfg, unsigned threads, std::size_t pulses, std::ostream& out)
{
    std::vector<Row> rows;
    std::string stage;
    try {
        stage = "eigen";
        const SystemParams p = cfg.device.params().with_detuning(Energy{0.0});
        const FiguresOfMerit fom = figures_of_merit(p.coupling, p.gamma_c, p.gamma_x);
        rows.push_back({"vacuum_rabi_splitting_ueV", "56", vacuum_rabi_splitting(p).value, 55.2, 56.2});
        rows.push_back({"g_over_gamma_c", "0.41", p.coupling.value / p.gamma_c.value, 0.411, 0.413});
        rows.push_back({"purcell_factor", "61+-7", fom.purcell, 54.0, 68.0});
        rows.push_back({"quantum_efficiency", "0.97", fom.efficiency, 0.969, 0.977});

        stage = "lifetime";
        const Energy delta{wavelength_to_energy(Wavelength{936.0}).value -
                           wavelength_to_energy(Wavelength{936.7}).value};
        const SystemParams far = p.with_detuning(delta);
        rows.push_back({"exciton_branch_lifetime_ps", "620+-70", exciton_branch_lifetime(far).value, 550.0, 690.0});
        rows.push_back({"bare_exciton_lifetime_ps", "700+-80",
                        infer_bare_lifetime(Duration{620.0}, delta, p.coupling, p.gamma_c).value, 620.0, 780.0});

        stage = "spectral_fit";
        SeriesOptions so;
        so.coupling = p.coupling;
        so.gamma_c = p.gamma_c;
        so.gamma_x = p.gamma_x;
        so.calib = cfg.device.tuning;
        so.seed = cfg.seed;
        const SeriesFit sf = fit_series(synthetic_series(so));
        rows.push_back({"fitted_splitting_ueV", "56", sf.coupling.splitting, 53.0, 59.0});
        rows.push_back({"fitted_g_ueV", "35", sf.coupling.coupling, 33.25, 36.75});
        rows.push_back({"fitted_gamma_c_ueV", "85", sf.coupling.gamma_c, 80.75, 89.25});

        stage = "photon_statistics";
        const PulsedStudySetup setup = pulsed_study_setup(cfg.device);
        const PulsedStudyResult study = run_pulsed_study(setup, pulses, cfg.seed, threads);
        rows.push_back({"g2_rr_zero", "0.18", study.rr.value, 0.10, 0.26});
        rows.push_back({"g2_xx_zero", "0.19", study.xx.value, 0.11, 0.27});
        rows.push_back({"g2_cc_zero", "0.39", study.cc.value, 0.31, 0.47});
        rows.push_back({"g2_xc_zero", "0.22", study.xc.value, 0.14, 0.30});
        rows.push_back({"c_to_x_flux_ratio", "3.5", study.cx_ratio, 3.3, 3.7});

        stage = "above_band";
        const G2Estimate ab = pulsed_g2_of(setup.resonance, above_band_schedule(2.0), pulses, cfg.seed + 2, threads);
        rows.push_back({"above_band_g2_zero", "0.85-1", ab.value, 0.8, 1.0});
    } catch (const std::exception& e) {
        throw std::runtime_error("demo stage '" + stage + "' failed: " + e.what());
    }

    int failed = 0;
    std::ostringstream r;
    provenance(r, cfg);
    r << "pulses=" << pulses << '\n';
    char buf[200];
    std::snprintf(buf, sizeof buf, "%-28s %-8s %12s %18s  %s\n", "quantity", "reference", "computed", "accepted", "result");
    r << buf;
    for (const auto& row : rows) {
        const bool ok = row.value >= row.lo && row.value <= row.hi;
        failed += ok ? 0 : 1;
        std::snprintf(buf, sizeof buf, "%-28s %-8s %12.4f %8.3f..%-8.3f  %s\n", row.name.c_str(), row.reference.c_str(),
                      row.value, row.lo, row.hi, ok ? "pass" : "FAIL");
        r << buf;
    }
    r << "failed=" << failed << '\n';
    out << r.str();
    return failed;
}

}  // namespace cqed
