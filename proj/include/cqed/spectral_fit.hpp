#pragma once

#include "cqed/coupled_oscillator.hpp"
#include "cqed/levenberg_marquardt.hpp"
#include "cqed/spectrum.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

namespace cqed {

/// Two area-parameterised Lorentzians plus a constant baseline, packed as
/// (c1, w1, A1, c2, w2, A2, b) with c1 <= c2 after a fit.
struct FitResult {
    std::array<LorentzianLine, 2> lines{};
    double baseline = 0.0;
    Eigen::MatrixXd covariance;  // 7x7, empty for seeds
    double reduced_chi2 = 0.0;
    bool converged = false;
    int iterations = 0;
    std::optional<double> temperature_K;

    Eigen::VectorXd pack() const;
    static FitResult unpack(const Eigen::VectorXd& x);
    double sigma(int index) const;  // sqrt of a covariance diagonal entry, 0 if absent
};

/// Pixel-mean model on the pixels bounded by `edges`; fills the 7-column
/// Jacobian when `jac` is non-null.
Eigen::VectorXd double_lorentzian_model(const std::vector<double>& edges, const Eigen::VectorXd& x,
                                        Eigen::MatrixXd* jac = nullptr);

/// Seeds from the two most prominent maxima of the 3-point smoothed
/// spectrum; a lone peak is split by one FWHM. Throws StatisticsError on a
/// flat spectrum.
FitResult initial_guess(const Spectrum& s);

/// Throws ConfigError when the wider seeded line spans fewer than 8 samples.
FitResult fit_double_lorentzian(const Spectrum& s, const FitResult& seed, const LmOptions& options = {});

struct BranchPoint {
    double center_nm = 0.0;
    double energy_ueV = 0.0;
    double fwhm_ueV = 0.0;
    double energy_error = 0.0;
    double fwhm_error = 0.0;
};

struct MeasuredPoint {
    double temperature_K = 0.0;
    BranchPoint upper;  // higher energy
    BranchPoint lower;
    bool converged = true;
};

using MeasuredCurve = std::vector<MeasuredPoint>;

/// Orders fits by temperature and converts them to energy branches. Needs
/// at least 5 temperature-tagged fits with strictly increasing temperature.
MeasuredCurve assemble_anticrossing(const std::vector<FitResult>& series);

struct CouplingExtraction {
    double gamma_c = 0.0;
    double gamma_x = 0.0;
    double splitting = 0.0;
    double coupling = 0.0;
    double resonance_K = 0.0;
    double gamma_c_error = 0.0;
    double gamma_x_error = 0.0;
    double splitting_error = 0.0;
    double coupling_error = 0.0;
    bool strongly_coupled = false;
    bool coupling_is_upper_bound = false;
};

/// Splitting from the minimum branch separation (parabola-refined), bare
/// widths from an exact 2x2 inversion of the most detuned points, and
/// g = sqrt((S/2)^2 + (gamma_c - gamma_x)^2 / 16). In weak coupling the
/// reported g is an upper bound.
CouplingExtraction extract_coupling(const MeasuredCurve& curve);

/// Exciton red-shifts quadratically in T, the cavity linearly; the two cross
/// at resonance_K and their relative shift over [T_min, T_max] is
/// relative_shift_nm.
struct TuningCalibration {
    double resonance_nm = 936.35;
    double resonance_K = 10.5;
    double cavity_slope = 0.002;  // nm/K
    double relative_shift_nm = 1.5;
    double t_min = 6.0;
    double t_max = 40.0;

    double exciton_curvature() const;  // nm/K^2
    static TuningCalibration resonant_pump();
    static TuningCalibration above_band_pump();
};

/// (exciton, cavity) wavelengths. Throws ConfigError outside [t_min, t_max].
std::pair<Wavelength, Wavelength> temperature_tuning(Temperature t, const TuningCalibration& calib);

/// Device tuned to temperature t with the given coupling and widths.
SystemParams device_at(Temperature t, const TuningCalibration& calib, Energy coupling, Energy gamma_c,
                       Energy gamma_x);

/// 0.5 K steps over 6-16 K, then 3 K steps to 40 K.
std::vector<double> default_temperature_grid();

struct SeriesOptions {
    Energy coupling{35.0};
    Energy gamma_c{85.0};
    Energy gamma_x{constants::hbar_ueV_ps / 700.0};
    TuningCalibration calib;
    std::vector<double> temperatures = default_temperature_grid();
    double pitch_nm = 0.03 / 8.0;
    double padding_nm = 0.4;
    double noise = 0.05;  // relative, multiplicative
    std::uint64_t seed = 1;
};

/// Temperature series: exciton-excited plus cavity-fed lines, pixel
/// averaged, multiplicative Gaussian noise, each rescaled to unit maximum.
std::vector<Spectrum> synthetic_series(const SeriesOptions& opt);

struct SeriesFit {
    std::vector<FitResult> fits;
    MeasuredCurve curve;
    CouplingExtraction coupling;
};

/// initial_guess -> fit -> assemble -> extract over temperature-tagged spectra.
SeriesFit fit_series(const std::vector<Spectrum>& spectra);

void write_fit_report(std::ostream& out, const FitResult& f);
void write_coupling_report(std::ostream& out, const CouplingExtraction& c);

}  // namespace cqed
