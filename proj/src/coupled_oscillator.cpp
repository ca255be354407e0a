#include "cqed/coupled_oscillator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cqed {

namespace {

using cd = std::complex<double>;

constexpr double kMixedBand = 0.1;  // |f - 1/2| below this is "mixed"

BranchCharacter classify(double exciton_weight)
{
    if (std::abs(exciton_weight - 0.5) < kMixedBand)
        return BranchCharacter::mixed;
    return exciton_weight > 0.5 ? BranchCharacter::exciton_like : BranchCharacter::cavity_like;
}

// Closed-form roots, "+" root first.
std::pair<cd, cd> closed_form_roots(const SystemParams& p)
{
    const double ex = p.exciton.value, ec = p.cavity.value;
    const double gx = p.gamma_x.value, gc = p.gamma_c.value, g = p.coupling.value;
    const double delta = ex - ec;
    const cd mean{0.5 * (ec + ex), -0.25 * (gc + gx)};
    const cd inner = cd{gc - gx, -2.0 * delta};
    const cd root = std::sqrt(cd{g * g, 0.0} - inner * inner / 16.0);
    return {mean + root, mean - root};
}

Eigen::Vector2cd eigenvector_for(const ModeMatrix& m, cd lambda, int fallback_axis)
{
    const cd a = m(0, 0), b = m(1, 1), g = m(0, 1);
    Eigen::Vector2cd v1(g, lambda - a);
    Eigen::Vector2cd v2(lambda - b, g);
    Eigen::Vector2cd v = v1.norm() >= v2.norm() ? v1 : v2;
    const double scale = std::abs(a) + std::abs(b) + std::abs(g);
    if (v.norm() <= 1e-300 || v.norm() < 1e-15 * scale) {
        v = Eigen::Vector2cd::Zero();
        v(fallback_axis) = 1.0;
    }
    return v.normalized();
}

}  // namespace

const char* to_string(BranchCharacter c)
{
    switch (c) {
    case BranchCharacter::exciton_like:
        return "exciton-like";
    case BranchCharacter::cavity_like:
        return "cavity-like";
    case BranchCharacter::mixed:
        return "mixed";
    }
    return "mixed";
}

void SystemParams::validate() const
{
    for (double v : {exciton.value, cavity.value, gamma_x.value, gamma_c.value, coupling.value})
        if (!std::isfinite(v))
            throw std::invalid_argument("system parameters must be finite");
    if (!(gamma_x.value > 0.0))
        throw std::invalid_argument("gamma_x must be > 0");
    if (!(gamma_c.value > 0.0))
        throw std::invalid_argument("gamma_c must be > 0");
    if (coupling.value < 0.0)
        throw std::invalid_argument("coupling must be >= 0");
}

SystemParams SystemParams::with_detuning(Energy delta) const
{
    SystemParams q = *this;
    q.exciton = Energy{cavity.value + delta.value};
    return q;
}

ModeMatrix coupled_mode_matrix(const SystemParams& p)
{
    ModeMatrix m;
    m(0, 0) = cd{p.exciton.value, -kModeDamping * p.gamma_x.value};
    m(1, 1) = cd{p.cavity.value, -kModeDamping * p.gamma_c.value};
    m(0, 1) = m(1, 0) = cd{p.coupling.value, 0.0};
    return m;
}

Eigen::Matrix2cd normal_mode_vectors(const SystemParams& p)
{
    const auto pair = eigen_energies(p);
    const ModeMatrix m = coupled_mode_matrix(p);
    Eigen::Matrix2cd v;
    // With g = 0 the eigenvector follows whichever bare mode it equals.
    const int upper_axis = std::abs(pair.upper - m(0, 0)) <= std::abs(pair.upper - m(1, 1)) ? 0 : 1;
    v.col(0) = eigenvector_for(m, pair.upper, upper_axis);
    v.col(1) = eigenvector_for(m, pair.lower, 1 - upper_axis);
    return v;
}

std::array<double, 2> exciton_fraction(const SystemParams& p)
{
    const auto v = normal_mode_vectors(p);
    return {std::norm(v(0, 0)), std::norm(v(0, 1))};
}

EigenPair eigen_energies(const SystemParams& p)
{
    p.validate();
    auto [plus, minus] = closed_form_roots(p);
    EigenPair out;
    if (plus.real() >= minus.real()) {
        out.upper = plus;
        out.lower = minus;
    } else {
        out.upper = minus;
        out.lower = plus;
    }
    const ModeMatrix m = coupled_mode_matrix(p);
    const int upper_axis = std::abs(out.upper - m(0, 0)) <= std::abs(out.upper - m(1, 1)) ? 0 : 1;
    const auto vu = eigenvector_for(m, out.upper, upper_axis);
    const auto vl = eigenvector_for(m, out.lower, 1 - upper_axis);
    out.upper_character = classify(std::norm(vu(0)));
    out.lower_character = classify(std::norm(vl(0)));
    return out;
}

bool is_strongly_coupled(const SystemParams& p)
{
    p.validate();
    const double g = p.coupling.value;
    const double d = p.gamma_c.value - p.gamma_x.value;
    return g * g > d * d / 16.0;
}

Energy vacuum_rabi_splitting(const SystemParams& p)
{
    if (!is_strongly_coupled(p))
        throw std::domain_error("no real splitting: system is not strongly coupled");
    const double g = p.coupling.value;
    const double d = p.gamma_c.value - p.gamma_x.value;
    return Energy{2.0 * std::sqrt(g * g - d * d / 16.0)};
}

std::pair<Energy, Energy> branch_linewidths(const SystemParams& p)
{
    const auto e = eigen_energies(p);
    return {Energy{fwhm_of(e.upper)}, Energy{fwhm_of(e.lower)}};
}

Duration exciton_branch_lifetime(const SystemParams& p)
{
    const auto e = eigen_energies(p);
    const auto f = exciton_fraction(p);
    if (std::abs(f[0] - f[1]) < 1e-9)
        throw std::domain_error("branches degenerate in width: exciton-like branch undefined");
    const ComplexEnergy ex = f[0] > f[1] ? e.upper : e.lower;
    return linewidth_to_lifetime(Energy{fwhm_of(ex)});
}

Duration infer_bare_lifetime(Duration measured, Energy detuning, Energy coupling, Energy gamma_c)
{
    if (!(measured.value > 0.0))
        throw std::invalid_argument("measured lifetime must be > 0");
    if (!(gamma_c.value > 0.0))
        throw std::invalid_argument("gamma_c must be > 0");
    const double target = constants::hbar_ueV_ps / measured.value;

    SystemParams p;
    p.cavity = Energy{0.0};
    p.exciton = detuning;
    p.gamma_c = gamma_c;
    p.coupling = coupling;

    auto residual = [&](double gx) {
        p.gamma_x = Energy{gx};
        return constants::hbar_ueV_ps / exciton_branch_lifetime(p).value - target;
    };

    double lo = gamma_c.value * 1e-12;
    double hi = gamma_c.value * (1.0 - 1e-12);
    double flo = residual(lo), fhi = residual(hi);
    if (flo > 0.0 || fhi < 0.0)
        throw std::domain_error("no bare exciton linewidth in (0, gamma_c) reproduces the measured lifetime");
    while (hi - lo > 1e-12 * 0.5 * (hi + lo)) {
        const double mid = 0.5 * (lo + hi);
        const double fm = residual(mid);
        if (fm == 0.0) {
            lo = hi = mid;
            break;
        }
        (fm < 0.0 ? lo : hi) = mid;
    }
    return linewidth_to_lifetime(Energy{0.5 * (lo + hi)});
}

FiguresOfMerit figures_of_merit(Energy coupling, Energy gamma_c, Energy gamma_x)
{
    if (!(gamma_c.value > 0.0) || !(gamma_x.value > 0.0) || coupling.value < 0.0)
        throw std::invalid_argument("figures_of_merit: linewidths must be > 0, coupling >= 0");
    const double g = coupling.value, gc = gamma_c.value, gx = gamma_x.value;
    FiguresOfMerit fom;
    fom.purcell = 4.0 * g * g / (gc * gx);
    fom.efficiency = fom.purcell / (1.0 + fom.purcell) * gc / (gc + gx);
    SystemParams p{Energy{0.0}, Energy{0.0}, gamma_x, gamma_c, coupling};
    fom.strongly_coupled = is_strongly_coupled(p);
    fom.rabi_splitting = fom.strongly_coupled ? vacuum_rabi_splitting(p) : Energy{0.0};
    return fom;
}

Energy coupling_from_splitting(Energy splitting, Energy gamma_c, Energy gamma_x)
{
    const double half = 0.5 * splitting.value;
    const double d = gamma_c.value - gamma_x.value;
    return Energy{std::sqrt(half * half + d * d / 16.0)};
}

AnticrossingCurve detuning_sweep(const SystemParams& p, const std::vector<double>& detuning_grid)
{
    p.validate();
    AnticrossingCurve curve;
    curve.reserve(detuning_grid.size());
    Eigen::Vector2cd prev_upper, prev_lower;
    for (std::size_t i = 0; i < detuning_grid.size(); ++i) {
        if (!std::isfinite(detuning_grid[i]))
            throw std::invalid_argument("detuning grid must be finite");
        const SystemParams q = p.with_detuning(Energy{detuning_grid[i]});
        const auto e = eigen_energies(q);
        const auto v = normal_mode_vectors(q);
        AnticrossingPoint pt;
        pt.detuning = Energy{detuning_grid[i]};
        bool swap = false;
        if (i > 0) {
            const double keep = std::abs(prev_upper.dot(v.col(0))) + std::abs(prev_lower.dot(v.col(1)));
            const double cross = std::abs(prev_upper.dot(v.col(1))) + std::abs(prev_lower.dot(v.col(0)));
            swap = cross > keep + 1e-12;
        }
        const int iu = swap ? 1 : 0;
        const int il = 1 - iu;
        const ComplexEnergy energies[2] = {e.upper, e.lower};
        const BranchCharacter chars[2] = {e.upper_character, e.lower_character};
        pt.upper = energies[iu];
        pt.lower = energies[il];
        pt.upper_character = chars[iu];
        pt.lower_character = chars[il];
        prev_upper = v.col(iu);
        prev_lower = v.col(il);
        curve.push_back(pt);
    }
    return curve;
}

std::vector<ModeLine> model_lines(const SystemParams& p, InitialExcitation initial)
{
    const auto e = eigen_energies(p);
    const double scale = p.gamma_c.value + p.gamma_x.value + p.coupling.value;
    if (std::abs(e.upper - e.lower) < 1e-9 * scale)
        return {ModeLine{0.5 * (e.upper + e.lower), 1.0}};

    const Eigen::Matrix2cd v = normal_mode_vectors(p);
    Eigen::Vector2cd init = initial == InitialExcitation::exciton_excited ? Eigen::Vector2cd(1.0, 0.0)
                                                                         : Eigen::Vector2cd(0.0, 1.0);
    const Eigen::Vector2cd c = v.fullPivLu().solve(init);
    double wu = std::norm(c(0)), wl = std::norm(c(1));
    const double total = wu + wl;
    wu /= total;
    wl /= total;
    std::vector<ModeLine> lines;
    if (wu > 0.0)
        lines.push_back({e.upper, wu});
    if (wl > 0.0)
        lines.push_back({e.lower, wl});
    return lines;
}

std::vector<LorentzianLine> to_wavelength_lines(const std::vector<ModeLine>& lines)
{
    std::vector<LorentzianLine> out;
    out.reserve(lines.size());
    for (const auto& l : lines) {
        const Wavelength center = energy_to_wavelength(Energy{l.energy.real()});
        const double fwhm = fwhm_of(l.energy) / energy_per_nm(center);
        out.push_back({center.value, fwhm, l.weight});
    }
    return out;
}

Spectrum model_spectrum(const SystemParams& p, const std::vector<double>& wavelength_grid_nm,
                        InitialExcitation initial)
{
    Spectrum s;
    s.wavelength_nm = wavelength_grid_nm;
    s.intensity.assign(wavelength_grid_nm.size(), 0.0);
    s.validate();
    const auto lines = to_wavelength_lines(model_lines(p, initial));
    for (const auto& l : lines)
        if (l.center_nm < wavelength_grid_nm.front() || l.center_nm > wavelength_grid_nm.back())
            throw std::invalid_argument("model_spectrum: grid does not cover both branch centers");
    s.intensity = render_lines(wavelength_grid_nm, lines);
    return s;
}

}  // namespace cqed
