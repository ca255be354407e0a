#pragma once

#include "cqed/config.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cqed {

// Subcommand bodies. Each writes a flat key=value report (or CSV) to `out`
// and throws the cqed error types on failure; the CLI maps those to exit
// codes.

void cmd_eigen(const RunConfig& cfg, std::ostream& out);

/// CSV columns T_K,lambda_upper_nm,lambda_lower_nm,fwhm_upper_ueV,fwhm_lower_ueV
/// over [analysis.t_min_K, analysis.t_max_K].
void cmd_sweep(const RunConfig& cfg, std::ostream& out);

/// Simulates analysis.duration_ps (or `duration_ps` if given) and writes the
/// click file to `path`. Returns the number of clicks.
std::size_t cmd_simulate(const RunConfig& cfg, unsigned threads, const std::string& path,
                         std::optional<double> duration_ps, std::ostream& out);

struct CorrelateOptions {
    std::vector<std::string> files;  // segments of one measurement, merged
    std::string channels_a = "C";
    std::string channels_b;          // empty: autocorrelation of channels_a
    double bin_width_ps = 128.0;
    std::optional<double> window_ps;  // default 13 rep periods (pulsed) or 1000 bins
    std::optional<double> rep_period_ps;  // pulsed estimator when set
    int n_side = 10;
    bool dark_subtract = false;
    std::string histogram_path;  // optional CSV output
};

void cmd_correlate(const CorrelateOptions& opt, std::ostream& out);

/// One spectrum: initial guess + fit report. Five or more temperature-tagged
/// spectra: the full series extraction.
void cmd_fit(const std::vector<std::string>& files, std::ostream& out);

/// Writes a synthetic temperature series (one CSV per temperature) into
/// `dir` and lists the files.
std::vector<std::string> cmd_spectra(const RunConfig& cfg, const std::string& dir, double noise, double pitch_nm,
                                     std::ostream& out);

/// End-to-end reproduction table. Returns the number of failed rows.
int cmd_demo(const RunConfig& cfg, unsigned threads, std::size_t pulses, std::ostream& out);

}  // namespace cqed
