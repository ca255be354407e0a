#include "cqed/spectral_fit.hpp"

#include "cqed/errors.hpp"
#include "cqed/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace cqed {

Eigen::VectorXd FitResult::pack() const
{
    Eigen::VectorXd x(7);
    x << lines[0].center_nm, lines[0].fwhm_nm, lines[0].area, lines[1].center_nm, lines[1].fwhm_nm,
        lines[1].area, baseline;
    return x;
}

FitResult FitResult::unpack(const Eigen::VectorXd& x)
{
    FitResult f;
    f.lines[0] = {x(0), x(1), x(2)};
    f.lines[1] = {x(3), x(4), x(5)};
    f.baseline = x(6);
    return f;
}

double FitResult::sigma(int index) const
{
    if (covariance.rows() != 7)
        return 0.0;
    return std::sqrt(std::max(covariance(index, index), 0.0));
}

Eigen::VectorXd double_lorentzian_model(const std::vector<double>& edges, const Eigen::VectorXd& x,
                                        Eigen::MatrixXd* jac)
{
    const auto n = static_cast<Eigen::Index>(edges.size()) - 1;
    Eigen::VectorXd y = Eigen::VectorXd::Constant(n, x(6));
    if (jac) {
        jac->setZero(n, 7);
        jac->col(6).setOnes();
    }
    for (int k = 0; k < 2; ++k) {
        const double c = x(3 * k), w = x(3 * k + 1), area = x(3 * k + 2);
        const double half = 0.5 * w;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double lo = edges[static_cast<std::size_t>(i)];
            const double hi = edges[static_cast<std::size_t>(i) + 1];
            const double width = hi - lo;
            const double a = (lo - c) / half;
            const double b = (hi - c) / half;
            const double shape = std::atan2(b - a, 1.0 + a * b) / (std::numbers::pi * width);
            y(i) += area * shape;
            if (jac) {
                const double ia = 1.0 / (1.0 + a * a), ib = 1.0 / (1.0 + b * b);
                const double d_c = -(ib - ia) / (half * std::numbers::pi * width);
                const double d_w = (a * ia - b * ib) / (w * std::numbers::pi * width);
                (*jac)(i, 3 * k) = area * d_c;
                (*jac)(i, 3 * k + 1) = area * d_w;
                (*jac)(i, 3 * k + 2) = shape;
            }
        }
    }
    return y;
}

namespace {

struct Peak {
    std::size_t index;
    double prominence;
};

// Topographic prominence of every local maximum.
std::vector<Peak> prominent_peaks(const std::vector<double>& y)
{
    std::vector<Peak> peaks;
    const std::size_t n = y.size();
    for (std::size_t i = 0; i < n; ++i) {
        const bool left_ok = i == 0 || y[i] > y[i - 1];
        const bool right_ok = i + 1 == n || y[i] >= y[i + 1];
        if (!left_ok || !right_ok)
            continue;
        double left_min = y[i], right_min = y[i];
        std::size_t j = i;
        while (j > 0 && y[j - 1] <= y[i])
            left_min = std::min(left_min, y[--j]);
        const bool left_higher = j > 0;
        j = i;
        while (j + 1 < n && y[j + 1] <= y[i])
            right_min = std::min(right_min, y[++j]);
        const bool right_higher = j + 1 < n;
        double base;
        if (left_higher && right_higher)
            base = std::max(left_min, right_min);
        else if (left_higher)
            base = left_min;
        else if (right_higher)
            base = right_min;
        else
            base = std::min(left_min, right_min);
        peaks.push_back({i, y[i] - base});
    }
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
        return a.prominence > b.prominence || (a.prominence == b.prominence && a.index < b.index);
    });
    return peaks;
}

// Full width at half height above `baseline`. A side is blocked when it
// meets a higher point or the other seeded peak before crossing.
double half_max_width(const std::vector<double>& x, const std::vector<double>& y, std::size_t peak,
                      double baseline, std::size_t other)
{
    const double half = baseline + 0.5 * (y[peak] - baseline);
    auto side = [&](int dir) -> double {
        std::size_t i = peak;
        while (true) {
            if ((dir < 0 && i == 0) || (dir > 0 && i + 1 == y.size()))
                return -1.0;
            const std::size_t j = dir < 0 ? i - 1 : i + 1;
            if (j == other || y[j] > y[peak])
                return -1.0;
            if (y[j] <= half) {
                const double t = (y[i] - half) / (y[i] - y[j]);
                return std::abs(x[i] + t * (x[j] - x[i]) - x[peak]);
            }
            i = j;
        }
    };
    const double l = side(-1), r = side(+1);
    if (l > 0.0 && r > 0.0)
        return l + r;
    if (l > 0.0 || r > 0.0)
        return 2.0 * std::max(l, r);
    return 0.0;
}

double median_pitch(const Spectrum& s)
{
    std::vector<double> d;
    for (std::size_t i = 1; i < s.size(); ++i)
        d.push_back(s.wavelength_nm[i] - s.wavelength_nm[i - 1]);
    std::nth_element(d.begin(), d.begin() + static_cast<long>(d.size() / 2), d.end());
    return d[d.size() / 2];
}

}  // namespace

FitResult initial_guess(const Spectrum& s)
{
    s.validate();
    if (s.size() < 8)
        throw StatisticsError("initial_guess: fewer than 8 samples");
    const auto& x = s.wavelength_nm;
    const std::size_t n = s.size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = i == 0 ? 0 : i - 1, b = std::min(n - 1, i + 1);
        double sum = 0.0;
        for (std::size_t j = a; j <= b; ++j)
            sum += s.intensity[j];
        y[i] = sum / static_cast<double>(b - a + 1);
    }
    std::vector<double> sorted = s.intensity;
    std::sort(sorted.begin(), sorted.end());
    const double baseline = sorted[static_cast<std::size_t>(0.05 * static_cast<double>(n - 1))];
    const double top = *std::max_element(y.begin(), y.end());
    if (!(top - baseline > 1e-12 * std::max(1.0, std::abs(top))))
        throw StatisticsError("initial_guess: flat spectrum");

    const auto peaks = prominent_peaks(y);
    const double pitch = median_pitch(s);
    auto seed_line = [&](std::size_t i, std::size_t other) {
        const double w = std::max(half_max_width(x, y, i, baseline, other), pitch);
        const double h = std::max(s.intensity[i], y[i]) - baseline;
        return LorentzianLine{x[i], w, 0.5 * std::numbers::pi * h * w};
    };

    FitResult f;
    f.baseline = baseline;
    if (peaks.size() >= 2 && peaks[1].prominence > 0.01 * peaks[0].prominence) {
        f.lines[0] = seed_line(peaks[0].index, peaks[1].index);
        f.lines[1] = seed_line(peaks[1].index, peaks[0].index);
        if (f.lines[0].center_nm > f.lines[1].center_nm)
            std::swap(f.lines[0], f.lines[1]);
    } else {
        const LorentzianLine one = seed_line(peaks.front().index, n);
        f.lines[0] = {one.center_nm - 0.5 * one.fwhm_nm, one.fwhm_nm, 0.5 * one.area};
        f.lines[1] = {one.center_nm + 0.5 * one.fwhm_nm, one.fwhm_nm, 0.5 * one.area};
    }
    f.temperature_K = s.temperature_K;
    return f;
}

FitResult fit_double_lorentzian(const Spectrum& s, const FitResult& seed, const LmOptions& options)
{
    s.validate();
    const double wide = std::max(seed.lines[0].fwhm_nm, seed.lines[1].fwhm_nm);
    if (!(seed.lines[0].fwhm_nm > 0.0 && seed.lines[1].fwhm_nm > 0.0))
        throw ConfigError("fit_double_lorentzian: seed widths must be > 0");
    if (wide / median_pitch(s) < 8.0)
        throw ConfigError("fit_double_lorentzian: fewer than 8 samples across the wider line");

    const auto edges = s.pixel_edges();
    const Eigen::Map<const Eigen::VectorXd> data(s.intensity.data(), static_cast<Eigen::Index>(s.size()));
    // Widths are searched in log space so a sub-pixel line cannot step
    // through zero.
    auto natural = [](Eigen::VectorXd u) {
        u(1) = std::exp(u(1));
        u(4) = std::exp(u(4));
        return u;
    };
    const ResidualFn fn = [&](const Eigen::VectorXd& u, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
        const Eigen::VectorXd p = natural(u);
        if (!p.allFinite() || !(p(1) > 0.0 && p(4) > 0.0))
            return false;
        r = double_lorentzian_model(edges, p, jac) - data;
        if (jac) {
            jac->col(1) *= p(1);
            jac->col(4) *= p(4);
        }
        return true;
    };
    auto run = [&](const FitResult& start) {
        Eigen::VectorXd u0 = start.pack();
        u0(1) = std::log(u0(1));
        u0(4) = std::log(u0(4));
        return levenberg_marquardt(fn, u0, options);
    };
    LmResult lm = run(seed);
    // A line narrower than a few pixels barely constrains its width, and the
    // search can slide into the zero-width limit. Restart it from a few
    // sub-pixel widths and keep the best optimum.
    const double pitch = median_pitch(s);
    for (int k = 0; k < 2; ++k) {
        if (seed.lines[static_cast<std::size_t>(k)].fwhm_nm >= 4.0 * pitch)
            continue;
        for (double scale : {1.0, 0.3, 0.1}) {
            FitResult start = seed;
            auto& line = start.lines[static_cast<std::size_t>(k)];
            line.fwhm_nm = scale * pitch;
            LmResult alt = run(start);
            if (alt.cost < lm.cost)
                lm = std::move(alt);
        }
    }
    lm.x = natural(lm.x);
    double_lorentzian_model(edges, lm.x, &lm.jacobian);

    FitResult out = FitResult::unpack(lm.x);
    out.covariance = covariance(lm);
    const auto dof = static_cast<double>(s.size()) - 7.0;
    out.reduced_chi2 = dof > 0.0 ? lm.residual.squaredNorm() / dof : 0.0;
    out.converged = lm.converged;
    out.iterations = lm.iterations;
    out.temperature_K = s.temperature_K;
    if (out.lines[0].center_nm > out.lines[1].center_nm) {
        std::swap(out.lines[0], out.lines[1]);
        Eigen::PermutationMatrix<7> perm;
        perm.indices() << 3, 4, 5, 0, 1, 2, 6;
        out.covariance = perm * out.covariance * perm.transpose();
    }
    return out;
}

MeasuredCurve assemble_anticrossing(const std::vector<FitResult>& series)
{
    if (series.size() < 5)
        throw ConfigError("assemble_anticrossing: need at least 5 temperatures");
    MeasuredCurve curve;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& f = series[i];
        if (!f.temperature_K)
            throw ConfigError("assemble_anticrossing: spectrum without temperature tag");
        if (i > 0 && !(*f.temperature_K > *series[i - 1].temperature_K))
            throw ConfigError("assemble_anticrossing: temperatures must increase strictly");
        MeasuredPoint p;
        p.temperature_K = *f.temperature_K;
        p.converged = f.converged;
        auto branch = [&](int k) {
            const auto& l = f.lines[static_cast<std::size_t>(k)];
            const Wavelength c{l.center_nm};
            const double slope = energy_per_nm(c);
            BranchPoint b;
            b.center_nm = l.center_nm;
            b.energy_ueV = wavelength_to_energy(c).value;
            b.fwhm_ueV = l.fwhm_nm * slope;
            b.energy_error = f.sigma(3 * k) * slope;
            b.fwhm_error = f.sigma(3 * k + 1) * slope;
            return b;
        };
        // shorter wavelength = higher energy
        p.upper = branch(0);
        p.lower = branch(1);
        curve.push_back(p);
    }
    return curve;
}

namespace {

struct BareModes {
    double gamma_c;
    double gamma_x;
};

// Exact inversion of the 2x2 coupled-mode problem for one measured pair of
// complex energies at known g.
BareModes invert_point(const MeasuredPoint& p, double g)
{
    using cd = std::complex<double>;
    const cd l1{p.upper.energy_ueV, -0.5 * p.upper.fwhm_ueV};
    const cd l2{p.lower.energy_ueV, -0.5 * p.lower.fwhm_ueV};
    const cd sum = l1 + l2;
    const cd diff = std::sqrt((l1 - l2) * (l1 - l2) - 4.0 * g * g);
    const cd a = 0.5 * (sum + diff), b = 0.5 * (sum - diff);
    // the cavity is the broader bare mode
    const cd cav = a.imag() < b.imag() ? a : b;
    const cd exc = a.imag() < b.imag() ? b : a;
    return {-cav.imag() / kModeDamping, std::max(-exc.imag() / kModeDamping, 0.0)};
}

}  // namespace

CouplingExtraction extract_coupling(const MeasuredCurve& curve)
{
    if (curve.size() < 5)
        throw ConfigError("extract_coupling: need at least 5 points");
    const std::size_t n = curve.size();
    std::vector<double> sep(n);
    for (std::size_t i = 0; i < n; ++i)
        sep[i] = curve[i].upper.energy_ueV - curve[i].lower.energy_ueV;
    const std::size_t imin = static_cast<std::size_t>(std::min_element(sep.begin(), sep.end()) - sep.begin());
    if (imin == 0 || imin + 1 == n)
        throw ConfigError("extract_coupling: the series does not span the resonance");

    CouplingExtraction out;
    // Parabola through sep^2 at the minimum and its neighbours.
    const double t0 = curve[imin - 1].temperature_K, t1 = curve[imin].temperature_K,
                 t2 = curve[imin + 1].temperature_K;
    const double y0 = sep[imin - 1] * sep[imin - 1], y1 = sep[imin] * sep[imin],
                 y2 = sep[imin + 1] * sep[imin + 1];
    const double d01 = (y1 - y0) / (t1 - t0), d12 = (y2 - y1) / (t2 - t1);
    const double c2 = (d12 - d01) / (t2 - t0);
    double s2 = y1;
    out.resonance_K = t1;
    if (c2 > 0.0) {
        const double c1 = d01 - c2 * (t0 + t1);
        const double tv = -c1 / (2.0 * c2);
        if (tv >= t0 && tv <= t2) {
            s2 = std::min(y1, y1 + c1 * (tv - t1) + c2 * (tv * tv - t1 * t1));
            out.resonance_K = tv;
        }
    }
    out.splitting = std::sqrt(std::max(s2, 0.0));
    const auto& pm = curve[imin];
    out.splitting_error = std::hypot(pm.upper.energy_error, pm.lower.energy_error);
    out.strongly_coupled = out.splitting > 3.0 * out.splitting_error && out.splitting > 0.0;

    // Bare widths from the most detuned points.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sep[a] > sep[b]; });
    const std::size_t n_far = std::min<std::size_t>(3, n);

    const double s_half = 0.5 * out.splitting;
    double g = s_half;
    {
        const double wmax = std::max(pm.upper.fwhm_ueV, pm.lower.fwhm_ueV);
        const double wmin = std::min(pm.upper.fwhm_ueV, pm.lower.fwhm_ueV);
        g = std::sqrt(s_half * s_half + (wmax - wmin) * (wmax - wmin) / 16.0);
    }
    std::vector<BareModes> bare(n_far);
    for (int it = 0; it < 200; ++it) {
        double gc = 0.0, gx = 0.0;
        for (std::size_t k = 0; k < n_far; ++k) {
            bare[k] = invert_point(curve[order[k]], g);
            gc += bare[k].gamma_c;
            gx += bare[k].gamma_x;
        }
        out.gamma_c = gc / static_cast<double>(n_far);
        out.gamma_x = gx / static_cast<double>(n_far);
        const double dg = out.gamma_c - out.gamma_x;
        const double g_new = std::sqrt(s_half * s_half + dg * dg / 16.0);
        const bool done = std::abs(g_new - g) <= 1e-14 * std::max(g_new, 1.0);
        g = g_new;
        if (done)
            break;
    }

    double var_c = 0.0, var_x = 0.0;
    for (std::size_t k = 0; k < n_far; ++k) {
        const auto& p = curve[order[k]];
        const bool upper_is_cavity = p.upper.fwhm_ueV > p.lower.fwhm_ueV;
        const auto& cav = upper_is_cavity ? p.upper : p.lower;
        const auto& exc = upper_is_cavity ? p.lower : p.upper;
        var_c += cav.fwhm_error * cav.fwhm_error;
        var_x += exc.fwhm_error * exc.fwhm_error;
    }
    const double nf = static_cast<double>(n_far);
    out.gamma_c_error = std::sqrt(var_c) / nf;
    out.gamma_x_error = std::sqrt(var_x) / nf;

    const double dg = out.gamma_c - out.gamma_x;
    if (out.strongly_coupled) {
        out.coupling = g;
    } else {
        const double s_up = 0.5 * (out.splitting + 3.0 * out.splitting_error);
        out.coupling = std::sqrt(s_up * s_up + dg * dg / 16.0);
        out.coupling_is_upper_bound = true;
    }
    if (out.coupling > 0.0) {
        const double ds = out.splitting / (4.0 * out.coupling) * out.splitting_error;
        const double dc = dg / (16.0 * out.coupling) * std::hypot(out.gamma_c_error, out.gamma_x_error);
        out.coupling_error = std::hypot(ds, dc);
    }
    return out;
}

double TuningCalibration::exciton_curvature() const
{
    const double span = t_max - t_min;
    return (relative_shift_nm + cavity_slope * span) / (t_max * t_max - t_min * t_min);
}

TuningCalibration TuningCalibration::resonant_pump()
{
    return TuningCalibration{};
}

TuningCalibration TuningCalibration::above_band_pump()
{
    TuningCalibration c;
    c.resonance_K = 12.0;
    return c;
}

std::pair<Wavelength, Wavelength> temperature_tuning(Temperature t, const TuningCalibration& calib)
{
    const double T = t.value;
    if (!(T >= calib.t_min && T <= calib.t_max))
        throw ConfigError("temperature " + std::to_string(T) + " K outside the calibrated range [" +
                          std::to_string(calib.t_min) + ", " + std::to_string(calib.t_max) + "] K");
    const double t0 = calib.resonance_K;
    const double lx = calib.resonance_nm + calib.exciton_curvature() * (T * T - t0 * t0);
    const double lc = calib.resonance_nm + calib.cavity_slope * (T - t0);
    return {Wavelength{lx}, Wavelength{lc}};
}

SystemParams device_at(Temperature t, const TuningCalibration& calib, Energy coupling, Energy gamma_c,
                       Energy gamma_x)
{
    const auto [lx, lc] = temperature_tuning(t, calib);
    SystemParams p{wavelength_to_energy(lx), wavelength_to_energy(lc), gamma_x, gamma_c, coupling};
    p.validate();
    return p;
}

std::vector<double> default_temperature_grid()
{
    std::vector<double> t;
    for (int k = 0; k <= 20; ++k)
        t.push_back(6.0 + 0.5 * k);
    for (double T = 19.0; T <= 40.0 + 1e-9; T += 3.0)
        t.push_back(T);
    return t;
}

std::vector<Spectrum> synthetic_series(const SeriesOptions& opt)
{
    std::vector<Spectrum> out;
    for (std::size_t i = 0; i < opt.temperatures.size(); ++i) {
        const Temperature t{opt.temperatures[i]};
        const SystemParams p = device_at(t, opt.calib, opt.coupling, opt.gamma_c, opt.gamma_x);
        auto lines = to_wavelength_lines(model_lines(p, InitialExcitation::exciton_excited));
        const auto fed = to_wavelength_lines(model_lines(p, InitialExcitation::cavity_fed));
        lines.insert(lines.end(), fed.begin(), fed.end());
        double lo = lines.front().center_nm, hi = lo;
        for (const auto& l : lines) {
            lo = std::min(lo, l.center_nm);
            hi = std::max(hi, l.center_nm);
        }
        const auto grid = uniform_grid(lo - opt.padding_nm, hi + opt.padding_nm, opt.pitch_nm);
        Spectrum s;
        s.wavelength_nm = grid;
        s.intensity = render_lines(grid, lines);
        s.temperature_K = t.value;
        Rng rng = make_rng(opt.seed, StreamPurpose::physics, i);
        if (opt.noise > 0.0)
            for (double& v : s.intensity)
                v *= 1.0 + opt.noise * standard_normal(rng);
        const double top = s.max_intensity();
        for (double& v : s.intensity)
            v /= top;
        out.push_back(std::move(s));
    }
    return out;
}

SeriesFit fit_series(const std::vector<Spectrum>& spectra)
{
    std::vector<const Spectrum*> sorted;
    for (const auto& s : spectra) {
        if (!s.temperature_K)
            throw ConfigError("fit_series: every spectrum needs a temperature tag");
        sorted.push_back(&s);
    }
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const Spectrum* a, const Spectrum* b) { return *a->temperature_K < *b->temperature_K; });
    SeriesFit out;
    for (const Spectrum* s : sorted)
        out.fits.push_back(fit_double_lorentzian(*s, initial_guess(*s)));
    out.curve = assemble_anticrossing(out.fits);
    out.coupling = extract_coupling(out.curve);
    return out;
}

namespace {

void kv(std::ostream& out, const char* key, double v)
{
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s=%.10g\n", key, v);
    out << buf;
}

}  // namespace

void write_fit_report(std::ostream& out, const FitResult& f)
{
    if (f.temperature_K)
        kv(out, "temperature_K", *f.temperature_K);
    for (int k = 0; k < 2; ++k) {
        const std::string p = "line" + std::to_string(k + 1) + "_";
        const auto& l = f.lines[static_cast<std::size_t>(k)];
        kv(out, (p + "center_nm").c_str(), l.center_nm);
        kv(out, (p + "center_err_nm").c_str(), f.sigma(3 * k));
        kv(out, (p + "fwhm_nm").c_str(), l.fwhm_nm);
        kv(out, (p + "fwhm_err_nm").c_str(), f.sigma(3 * k + 1));
        kv(out, (p + "area").c_str(), l.area);
    }
    kv(out, "baseline", f.baseline);
    kv(out, "reduced_chi2", f.reduced_chi2);
    out << "converged=" << (f.converged ? "true" : "false") << '\n';
}

void write_coupling_report(std::ostream& out, const CouplingExtraction& c)
{
    kv(out, "gamma_c_ueV", c.gamma_c);
    kv(out, "gamma_c_err_ueV", c.gamma_c_error);
    kv(out, "gamma_x_ueV", c.gamma_x);
    kv(out, "gamma_x_err_ueV", c.gamma_x_error);
    kv(out, "splitting_ueV", c.splitting);
    kv(out, "splitting_err_ueV", c.splitting_error);
    kv(out, "g_ueV", c.coupling);
    kv(out, "g_err_ueV", c.coupling_error);
    kv(out, "resonance_K", c.resonance_K);
    out << "strongly_coupled=" << (c.strongly_coupled ? "true" : "false") << '\n';
    out << "g_is_upper_bound=" << (c.coupling_is_upper_bound ? "true" : "false") << '\n';
}

}  // namespace cqed
