#include "cqed/hbt.hpp"

#include "cqed/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace cqed {

double CorrelationHistogram::total() const
{
    return std::accumulate(counts.begin(), counts.end(), 0.0);
}

double DecayHistogram::total() const
{
    return std::accumulate(counts.begin(), counts.end(), 0.0);
}

CorrelationHistogram correlate(const std::vector<double>& a, const std::vector<double>& b, double duration_ps,
                               double window_ps, double bin_width_ps, bool autocorrelation)
{
    if (a.empty() || b.empty())
        throw StatisticsError("correlate: empty click list");
    if (!(bin_width_ps > 0.0) || !(window_ps >= 0.0) || !(duration_ps > 0.0))
        throw std::invalid_argument("correlate: bin width and duration must be > 0, window >= 0");
    if (!std::is_sorted(a.begin(), a.end()) || !std::is_sorted(b.begin(), b.end()))
        throw std::invalid_argument("correlate: click times must be sorted");

    CorrelationHistogram h;
    h.bin_width_ps = bin_width_ps;
    h.half_bins = static_cast<int>(std::lround(window_ps / bin_width_ps));
    h.counts.assign(2 * h.half_bins + 1, 0.0);
    h.singles_a = a.size();
    h.singles_b = b.size();
    h.duration_ps = duration_ps;
    h.autocorrelation = autocorrelation;

    const double reach = h.reach_ps();
    std::size_t lo = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        while (lo < b.size() && b[lo] < a[i] - reach)
            ++lo;
        for (std::size_t j = lo; j < b.size() && b[j] < a[i] + reach; ++j) {
            if (autocorrelation && i == j)
                continue;
            const auto k = static_cast<long>(std::floor((b[j] - a[i] + reach) / bin_width_ps));
            if (k >= 0 && k < static_cast<long>(h.counts.size()))
                h.counts[static_cast<std::size_t>(k)] += 1.0;
        }
    }
    return h;
}

CorrelationHistogram correlate(const ClickStream& s, std::string_view channels_a, std::string_view channels_b,
                               double window_ps, double bin_width_ps)
{
    const std::string ca = parse_channel_set(channels_a);
    const std::string cb = parse_channel_set(channels_b);
    const auto a = s.times(ca);
    if (ca == cb)
        return correlate(a, a, s.duration_ps, window_ps, bin_width_ps, true);
    return correlate(a, s.times(cb), s.duration_ps, window_ps, bin_width_ps, false);
}

CorrelationHistogram merge(const CorrelationHistogram& x, const CorrelationHistogram& y)
{
    if (x.bin_width_ps != y.bin_width_ps || x.half_bins != y.half_bins || x.autocorrelation != y.autocorrelation)
        throw std::invalid_argument("merge: histograms have different binning");
    CorrelationHistogram out = x;
    for (std::size_t i = 0; i < out.counts.size(); ++i)
        out.counts[i] += y.counts[i];
    out.singles_a += y.singles_a;
    out.singles_b += y.singles_b;
    out.duration_ps += y.duration_ps;
    return out;
}

const char* to_string(G2Method m)
{
    return m == G2Method::pulsed_peak_area ? "pulsed_peak_area" : "cw_normalized";
}

double peak_area(const CorrelationHistogram& h, double rep_period_ps, int k)
{
    const double lo = (k - 0.5) * rep_period_ps;
    const double hi = (k + 0.5) * rep_period_ps;
    double area = 0.0;
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        const double a = h.tau(i) - 0.5 * h.bin_width_ps;
        const double b = a + h.bin_width_ps;
        const double overlap = std::min(b, hi) - std::max(a, lo);
        if (overlap > 0.0)
            area += h.counts[i] * overlap / h.bin_width_ps;
    }
    return area;
}

G2Estimate pulsed_g2_zero(const CorrelationHistogram& h, double rep_period_ps, int n_side)
{
    if (!(rep_period_ps > 0.0) || n_side < 1)
        throw std::invalid_argument("pulsed_g2_zero: rep period must be > 0 and n_side >= 1");
    if (h.reach_ps() < (n_side + 0.5) * rep_period_ps - 1e-9)
        throw std::invalid_argument("pulsed_g2_zero: histogram window does not cover the side peaks");
    const double centre = peak_area(h, rep_period_ps, 0);
    double sides = 0.0;
    for (int k = 1; k <= n_side; ++k)
        sides += peak_area(h, rep_period_ps, k) + peak_area(h, rep_period_ps, -k);
    if (!(sides > 0.0))
        throw StatisticsError("pulsed_g2_zero: side peaks are empty");
    const double mean_side = sides / (2.0 * n_side);
    G2Estimate g;
    g.value = centre / mean_side;
    g.error = std::sqrt(std::max(centre, 1.0) / (mean_side * mean_side) + g.value * g.value / sides);
    g.method = G2Method::pulsed_peak_area;
    return g;
}

G2Estimate cross_g2_zero(const CorrelationHistogram& h, double rep_period_ps, int n_side)
{
    return pulsed_g2_zero(h, rep_period_ps, n_side);
}

std::vector<double> normalized_curve(const CorrelationHistogram& h)
{
    std::vector<double> g(h.counts.size(), 0.0);
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        const double overlap = h.duration_ps - std::abs(h.tau(i));
        const double norm = h.rate_a() * h.rate_b() * overlap * h.bin_width_ps;
        g[i] = norm > 0.0 ? h.counts[i] / norm : 0.0;
    }
    return g;
}

G2Estimate cw_g2_zero(const CorrelationHistogram& h)
{
    if (h.singles_a == 0 || h.singles_b == 0)
        throw StatisticsError("cw_g2_zero: no singles");
    const auto mid = static_cast<std::size_t>(h.half_bins);
    const double norm = h.rate_a() * h.rate_b() * h.duration_ps * h.bin_width_ps;
    G2Estimate g;
    g.value = h.counts[mid] / norm;
    g.error = std::sqrt(std::max(h.counts[mid], 1.0)) / norm;
    g.method = G2Method::cw_normalized;
    return g;
}

CorrelationHistogram subtract_dark_counts(const CorrelationHistogram& h, double dark_rate_a, double dark_rate_b)
{
    if (dark_rate_a < 0.0 || dark_rate_b < 0.0)
        throw ConfigError("dark rates must be >= 0");
    CorrelationHistogram out = h;
    if (dark_rate_a == 0.0 && dark_rate_b == 0.0)
        return out;
    const double sa = h.rate_a();
    const double sb = h.rate_b();
    if (dark_rate_a > sa || dark_rate_b > sb)
        throw ConfigError("dark rate exceeds the measured singles rate");
    const double pair_rate = dark_rate_a * sb + sa * dark_rate_b - dark_rate_a * dark_rate_b;
    for (std::size_t i = 0; i < out.counts.size(); ++i) {
        const double overlap = h.duration_ps - std::abs(h.tau(i));
        const double acc = pair_rate * overlap * h.bin_width_ps;
        const double c = out.counts[i];
        if (acc - c > 5.0 * std::sqrt(std::max(acc, 1.0)))
            throw ConfigError("dark-count subtraction exceeds bin " + std::to_string(i) +
                              " by more than 5 sigma; dark rates look miscalibrated");
        out.counts[i] = c - acc;  // unclamped, so the estimate stays unbiased
    }
    return out;
}

DecayHistogram decay_histogram(const std::vector<double>& times, double rep_period_ps, double bin_width_ps,
                               bool first_only)
{
    if (!(rep_period_ps > 0.0) || !(bin_width_ps > 0.0))
        throw std::invalid_argument("decay_histogram: rep period and bin width must be > 0");
    DecayHistogram h;
    h.bin_width_ps = bin_width_ps;
    h.counts.assign(static_cast<std::size_t>(std::ceil(rep_period_ps / bin_width_ps)), 0.0);
    long last_pulse = -1;
    for (double t : times) {
        const long pulse = static_cast<long>(std::floor(t / rep_period_ps));
        if (first_only && pulse == last_pulse)
            continue;
        last_pulse = pulse;
        const double d = t - static_cast<double>(pulse) * rep_period_ps;
        const auto k = static_cast<std::size_t>(d / bin_width_ps);
        if (k < h.counts.size())
            h.counts[k] += 1.0;
    }
    return h;
}

namespace {

struct TailData {
    std::vector<double> lo;  // bin edges relative to the fit start
    std::vector<double> hi;
    std::vector<double> n;
    double span = 0.0;
    double total = 0.0;
};

double log_likelihood(const TailData& d, double tau)
{
    const double norm = -std::expm1(-d.span / tau);
    double ll = 0.0;
    for (std::size_t i = 0; i < d.n.size(); ++i) {
        if (d.n[i] == 0.0)
            continue;
        const double p = (std::exp(-d.lo[i] / tau) - std::exp(-d.hi[i] / tau)) / norm;
        ll += d.n[i] * std::log(std::max(p, 1e-300));
    }
    return ll;
}

}  // namespace

LifetimeFit fit_lifetime(const DecayHistogram& h, double jitter_sigma_ps)
{
    if (jitter_sigma_ps < 0.0)
        throw std::invalid_argument("fit_lifetime: jitter must be >= 0");
    const double start = 3.0 * jitter_sigma_ps;
    // Jitter also pushes early clicks of the next pulse back into the last
    // bins, so those are dropped symmetrically.
    const double stop = h.left(h.counts.size()) - start;
    TailData d;
    double origin = -1.0;
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        if (h.left(i) < start || h.left(i + 1) > stop)
            continue;
        if (origin < 0.0)
            origin = h.left(i);
        d.lo.push_back(h.left(i) - origin);
        d.hi.push_back(h.left(i + 1) - origin);
        d.n.push_back(h.counts[i]);
        d.total += h.counts[i];
    }
    if (d.n.size() < 2 || d.total < 100.0)
        throw StatisticsError("fit_lifetime: fewer than 100 counts in the fit range");
    d.span = d.hi.back();

    // Golden-section search in log(tau).
    double a = std::log(h.bin_width_ps * 1e-2);
    double b = std::log(d.span * 1e2);
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1 = log_likelihood(d, std::exp(x1)), f2 = log_likelihood(d, std::exp(x2));
    for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
        if (f1 > f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = log_likelihood(d, std::exp(x1));
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = log_likelihood(d, std::exp(x2));
        }
    }
    const double tau = std::exp(0.5 * (a + b));

    LifetimeFit fit;
    fit.tau_ps = tau;
    fit.counts_used = d.total;
    const double step = 1e-3 * tau;
    const double curv = (log_likelihood(d, tau + step) - 2.0 * log_likelihood(d, tau) +
                         log_likelihood(d, tau - step)) / (step * step);
    fit.error_ps = curv < 0.0 ? 1.0 / std::sqrt(-curv) : INFINITY;

    const double norm = -std::expm1(-d.span / tau);
    double chi2 = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < d.n.size(); ++i) {
        const double expected = d.total * (std::exp(-d.lo[i] / tau) - std::exp(-d.hi[i] / tau)) / norm;
        if (expected <= 0.0)
            continue;
        chi2 += (d.n[i] - expected) * (d.n[i] - expected) / expected;
        ++used;
    }
    fit.reduced_chi2 = used > 1 ? chi2 / static_cast<double>(used - 1) : 0.0;
    fit.non_exponential = fit.reduced_chi2 > 3.0;
    return fit;
}

double per_pulse_g2(const std::vector<double>& a, const std::vector<double>& b, double rep_period_ps,
                    double duration_ps, bool autocorrelation)
{
    const auto n_pulses = static_cast<std::size_t>(std::floor(duration_ps / rep_period_ps));
    if (n_pulses == 0)
        throw StatisticsError("per_pulse_g2: no complete pulse window");
    auto bin = [&](const std::vector<double>& t) {
        std::vector<double> n(n_pulses, 0.0);
        for (double x : t) {
            if (x < 0.0)
                continue;
            const auto k = static_cast<std::size_t>(x / rep_period_ps);
            if (k < n_pulses)
                n[k] += 1.0;
        }
        return n;
    };
    const auto na = bin(a);
    const auto nb = autocorrelation ? na : bin(b);
    double sa = 0.0, sb = 0.0, pairs = 0.0;
    for (std::size_t k = 0; k < n_pulses; ++k) {
        sa += na[k];
        sb += nb[k];
        pairs += autocorrelation ? na[k] * (na[k] - 1.0) : na[k] * nb[k];
    }
    if (sa == 0.0 || sb == 0.0)
        throw StatisticsError("per_pulse_g2: no clicks");
    const double n = static_cast<double>(n_pulses);
    return (pairs / n) / ((sa / n) * (sb / n));
}

void write_histogram_csv(std::ostream& out, const CorrelationHistogram& h)
{
    out << "tau_ps,counts\n";
    char buf[64];
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.1f,%.6g\n", h.tau(i), h.counts[i]);
        out << buf;
    }
}

}  // namespace cqed
