#include "cqed/spectrum.hpp"

#include "cqed/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace cqed {

void Spectrum::validate() const
{
    if (wavelength_nm.size() != intensity.size())
        throw std::invalid_argument("spectrum: wavelength and intensity sizes differ");
    if (wavelength_nm.size() < 2)
        throw std::invalid_argument("spectrum: need at least two samples");
    for (std::size_t i = 0; i < size(); ++i) {
        if (!std::isfinite(wavelength_nm[i]) || !std::isfinite(intensity[i]))
            throw std::invalid_argument("spectrum: non-finite sample");
        if (i > 0 && !(wavelength_nm[i] > wavelength_nm[i - 1]))
            throw std::invalid_argument("spectrum: wavelengths must be strictly increasing");
    }
}

std::vector<double> Spectrum::pixel_edges() const
{
    const auto& w = wavelength_nm;
    const std::size_t n = w.size();
    std::vector<double> edges(n + 1);
    if (n == 0)
        return {};
    if (n == 1) {
        edges[0] = w[0];
        edges[1] = w[0];
        return edges;
    }
    for (std::size_t i = 1; i < n; ++i)
        edges[i] = 0.5 * (w[i - 1] + w[i]);
    edges[0] = w[0] - (edges[1] - w[0]);
    edges[n] = w[n - 1] + (w[n - 1] - edges[n - 1]);
    return edges;
}

double Spectrum::area() const
{
    const auto edges = pixel_edges();
    double sum = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
        sum += intensity[i] * (edges[i + 1] - edges[i]);
    return sum;
}

double Spectrum::max_intensity() const
{
    if (intensity.empty())
        return 0.0;
    return *std::max_element(intensity.begin(), intensity.end());
}

double lorentzian_pixel_mean(double lo, double hi, double center, double fwhm)
{
    const double half = 0.5 * fwhm;
    const double width = hi - lo;
    if (width <= 0.0)
        return 0.0;
    // atan difference written to stay accurate far in the tails
    const double a = (lo - center) / half;
    const double b = (hi - center) / half;
    const double diff = std::atan2(b - a, 1.0 + a * b);
    return diff / (std::numbers::pi * width);
}

std::vector<double> render_lines(const std::vector<double>& grid_nm,
                                 const std::vector<LorentzianLine>& lines, double baseline)
{
    Spectrum tmp;
    tmp.wavelength_nm = grid_nm;
    const auto edges = tmp.pixel_edges();
    std::vector<double> out(grid_nm.size(), baseline);
    for (std::size_t i = 0; i < grid_nm.size(); ++i)
        for (const auto& line : lines)
            out[i] += line.area * lorentzian_pixel_mean(edges[i], edges[i + 1], line.center_nm,
                                                         line.fwhm_nm);
    return out;
}

std::vector<double> uniform_grid(double lo, double hi, double step)
{
    if (!(step > 0.0) || !(hi > lo))
        throw std::invalid_argument("uniform_grid: need hi > lo and step > 0");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i)
        grid[i] = lo + static_cast<double>(i) * step;
    return grid;
}

Spectrum read_spectrum_csv(std::istream& in)
{
    Spectrum s;
    std::string line;
    bool header_seen = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line[0] == '#') {
            const auto pos = line.find("temperature_K=");
            if (pos != std::string::npos)
                s.temperature_K = std::stod(line.substr(pos + 14));
            continue;
        }
        if (!header_seen) {
            if (line != "wavelength_nm,intensity")
                throw ConfigError("spectrum csv: expected header 'wavelength_nm,intensity'");
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ConfigError("spectrum csv: malformed row at line " + std::to_string(lineno));
        try {
            s.wavelength_nm.push_back(std::stod(line.substr(0, comma)));
            s.intensity.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw ConfigError("spectrum csv: malformed number at line " + std::to_string(lineno));
        }
    }
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return s;
}

Spectrum read_spectrum_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open spectrum file " + path);
    return read_spectrum_csv(in);
}

void write_spectrum_csv(std::ostream& out, const Spectrum& s)
{
    char buf[96];
    if (s.temperature_K) {
        std::snprintf(buf, sizeof buf, "# temperature_K=%.6g\n", *s.temperature_K);
        out << buf;
    }
    out << "wavelength_nm,intensity\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.6f,%.9g\n", s.wavelength_nm[i], s.intensity[i]);
        out << buf;
    }
}

}  // namespace cqed
