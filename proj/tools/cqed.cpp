// cqed: command-line front end for the cavity-QED toolkit.
#include "cqed/commands.hpp"
#include "cqed/errors.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

namespace {

enum Exit { ok = 0, other = 1, config = 2, convergence = 3, statistics = 4 };

cqed::RunConfig load(const std::string& path, const std::optional<std::uint64_t>& seed)
{
    cqed::RunConfig cfg = path.empty() ? cqed::RunConfig{} : cqed::load_run_config(path);
    if (seed)
        cfg.seed = *seed;
    return cfg;
}

std::string in_dir(const std::string& dir, const std::string& name)
{
    if (dir.empty() || std::filesystem::path(name).is_absolute())
        return name;
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / name).string();
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Cavity-QED strong-coupling model, photon-stream simulator and analysis tools"};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::string out_dir;
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u));
    app.add_option("--out-dir", out_dir, "directory for output files");

    std::string config_path;
    auto* eigen = app.add_subcommand("eigen", "normal modes, splitting and figures of merit");
    eigen->add_option("-c,--config", config_path, "run config (JSON)");

    auto* sweep = app.add_subcommand("sweep", "model anticrossing over temperature (CSV)");
    sweep->add_option("-c,--config", config_path, "run config (JSON)");
    std::optional<double> t_min, t_max, t_step;
    sweep->add_option("--t-min", t_min, "K");
    sweep->add_option("--t-max", t_max, "K");
    sweep->add_option("--t-step", t_step, "K");

    auto* simulate = app.add_subcommand("simulate", "quantum-jump click stream");
    simulate->add_option("-c,--config", config_path, "run config (JSON)");
    std::string stream_out = "clicks.csv";
    std::optional<double> duration;
    simulate->add_option("-o,--output", stream_out, "click file");
    simulate->add_option("--duration", duration, "ps");

    auto* corr = app.add_subcommand("correlate", "HBT histogram and g2(0) from click files");
    cqed::CorrelateOptions copt;
    std::string channels = "C";
    corr->add_option("files", copt.files, "click files (segments are merged)")->required();
    corr->add_option("--channels", channels, "A or A,B e.g. X,C for a cross-correlation");
    corr->add_option("--bin", copt.bin_width_ps, "bin width, ps");
    corr->add_option("--window", copt.window_ps, "half window, ps");
    corr->add_option("--rep-period", copt.rep_period_ps, "pulse period, ps (pulsed estimator)");
    corr->add_option("--n-side", copt.n_side, "side peaks per side");
    corr->add_flag("--dark-subtract", copt.dark_subtract, "remove dark-count accidentals");
    corr->add_option("--histogram", copt.histogram_path, "histogram CSV output");

    auto* fit = app.add_subcommand("fit", "double-Lorentzian fit or temperature-series extraction");
    std::vector<std::string> spectra;
    fit->add_option("files", spectra, "spectrum CSV files")->required();

    auto* gen = app.add_subcommand("spectra", "synthetic temperature series of spectra");
    gen->add_option("-c,--config", config_path, "run config (JSON)");
    double noise = 0.05, pitch = 0.03 / 8.0;
    gen->add_option("--noise", noise, "relative multiplicative noise");
    gen->add_option("--pitch", pitch, "sample pitch, nm");

    auto* demo = app.add_subcommand("demo", "end-to-end reproduction table on the bundled device");
    demo->add_option("-c,--config", config_path, "run config (JSON)");
    std::size_t pulses = 200000;
    demo->add_option("--pulses", pulses, "pulses per photon-statistics run");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ok : config;
    }

    // Reports are assembled in memory so a failure leaves no partial output.
    std::ostringstream out;
    int code = ok;
    try {
        if (*eigen) {
            cqed::cmd_eigen(load(config_path, seed), out);
        } else if (*sweep) {
            auto cfg = load(config_path, seed);
            if (t_min)
                cfg.analysis.t_min_K = *t_min;
            if (t_max)
                cfg.analysis.t_max_K = *t_max;
            if (t_step)
                cfg.analysis.t_step_K = *t_step;
            cqed::cmd_sweep(cfg, out);
        } else if (*simulate) {
            cqed::cmd_simulate(load(config_path, seed), threads, in_dir(out_dir, stream_out), duration, out);
        } else if (*corr) {
            const auto comma = channels.find(',');
            copt.channels_a = channels.substr(0, comma);
            copt.channels_b = comma == std::string::npos ? "" : channels.substr(comma + 1);
            if (!copt.histogram_path.empty())
                copt.histogram_path = in_dir(out_dir, copt.histogram_path);
            cqed::cmd_correlate(copt, out);
        } else if (*fit) {
            cqed::cmd_fit(spectra, out);
        } else if (*gen) {
            cqed::cmd_spectra(load(config_path, seed), out_dir.empty() ? "spectra" : out_dir, noise, pitch, out);
        } else if (*demo) {
            code = cqed::cmd_demo(load(config_path, seed), threads, pulses, out) == 0 ? ok : other;
        }
    } catch (const cqed::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config;
    } catch (const cqed::ConvergenceError& e) {
        std::cerr << "no convergence: " << e.what() << '\n';
        return convergence;
    } catch (const cqed::StatisticsError& e) {
        std::cerr << "insufficient statistics: " << e.what() << '\n';
        return statistics;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return other;
    }
    std::cout << out.str();
    return code;
}
