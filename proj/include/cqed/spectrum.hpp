#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cqed {

/// Sampled emission spectrum. Each sample is the mean intensity over its
/// pixel, whose edges sit halfway between neighbouring wavelengths (the
/// outer pixels are mirrored).
struct Spectrum {
    std::vector<double> wavelength_nm;
    std::vector<double> intensity;
    std::optional<double> temperature_K;

    std::size_t size() const { return wavelength_nm.size(); }

    /// Throws std::invalid_argument unless wavelengths are strictly
    /// increasing and all values are finite.
    void validate() const;

    /// size()+1 pixel edges.
    std::vector<double> pixel_edges() const;

    /// Sum of intensity times pixel width.
    double area() const;

    double max_intensity() const;
};

/// Lorentzian line in wavelength space, parameterised by area.
struct LorentzianLine {
    double center_nm{};
    double fwhm_nm{};
    double area{};
};

/// Mean of a unit-area Lorentzian over [lo, hi].
double lorentzian_pixel_mean(double lo, double hi, double center, double fwhm);

/// Renders lines plus a constant baseline onto the pixels of `grid`.
std::vector<double> render_lines(const std::vector<double>& grid_nm,
                                 const std::vector<LorentzianLine>& lines,
                                 double baseline = 0.0);

std::vector<double> uniform_grid(double lo, double hi, double step);

/// CSV: optional `# temperature_K=<f>` header, then `wavelength_nm,intensity`.
Spectrum read_spectrum_csv(std::istream& in);
Spectrum read_spectrum_csv(const std::string& path);
void write_spectrum_csv(std::ostream& out, const Spectrum& s);

}  // namespace cqed
