#pragma once

#include <complex>

namespace cqed {

/// Canonical units: energies in µeV, times in ps, wavelengths in nm,
/// temperatures in K.
namespace constants {
inline constexpr double hc_ueV_nm = 1.239842e9;
inline constexpr double hbar_ueV_ps = 658.2120;
}  // namespace constants

struct Energy {
    double value{};  // µeV
    auto operator<=>(const Energy&) const = default;
};

struct Wavelength {
    double value{};  // nm
    auto operator<=>(const Wavelength&) const = default;
};

struct Duration {
    double value{};  // ps
    auto operator<=>(const Duration&) const = default;
};

struct Temperature {
    double value{};  // K
    auto operator<=>(const Temperature&) const = default;
};

/// Complex normal-mode energy in µeV. Decaying modes have Im < 0 and a
/// FWHM linewidth of 2|Im|.
using ComplexEnergy = std::complex<double>;

inline double fwhm_of(ComplexEnergy e) { return 2.0 * std::abs(e.imag()); }

Energy wavelength_to_energy(Wavelength lambda);
Wavelength energy_to_wavelength(Energy e);

Duration linewidth_to_lifetime(Energy gamma);
Energy lifetime_to_linewidth(Duration tau);

double q_factor(Energy e, Energy gamma_c);

/// |dE/dλ| at the given wavelength, in µeV per nm.
double energy_per_nm(Wavelength lambda);

}  // namespace cqed
