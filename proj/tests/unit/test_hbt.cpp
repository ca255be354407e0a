#include "cqed/errors.hpp"
#include "cqed/hbt.hpp"
#include "cqed/random.hpp"
#include "cqed/trajectory.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace cqed;

namespace {

constexpr double kRep = 13000.0;

std::vector<double> poisson_times(double rate, double duration, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<double> t;
    for (double x = exponential(rng, rate); x < duration; x += exponential(rng, rate))
        t.push_back(x);
    return t;
}

// One photon per pulse plus Poisson(mu) extra photons, all with exponential delays.
std::vector<double> pulsed_mixture(std::size_t pulses, double mu, double tau, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<double> t;
    for (std::size_t k = 0; k < pulses; ++k) {
        const long n = 1 + poisson(rng, mu);
        for (long j = 0; j < n; ++j)
            t.push_back(static_cast<double>(k) * kRep + std::min(exponential(rng, 1.0 / tau), kRep - 1.0));
    }
    std::sort(t.begin(), t.end());
    return t;
}

double window_for(int n_side) { return (n_side + 0.5) * kRep + 128.0; }

// Exact <n(n-1)>/<n>^2 for n = 1 + Poisson(mu) by summing the distribution.
double enumerated_g2(double mu)
{
    double p = std::exp(-mu), m1 = 0.0, m2 = 0.0;
    for (int k = 0; k < 200; ++k) {
        if (k > 0)
            p *= mu / k;
        const double n = 1.0 + k;
        m1 += p * n;
        m2 += p * n * (n - 1.0);
    }
    return m2 / (m1 * m1);
}

}  // namespace

TEST_CASE("two single clicks land in one bin at their delay")
{
    const auto h = correlate({1000.0}, {1500.0}, 1e4, 1000.0, 128.0, false);
    CHECK(h.total() == 1.0);
    CHECK(h.counts[static_cast<std::size_t>(h.half_bins + 4)] == 1.0);
    CHECK(h.tau(static_cast<std::size_t>(h.half_bins + 4)) == 512.0);
    CHECK_THROWS_AS(correlate({}, {1.0}, 10.0, 5.0, 1.0, false), StatisticsError);
}

TEST_CASE("Poisson autocorrelation is flat")
{
    const double rate = 2e-4, T = 2e8, bin = 128.0;
    const auto t = poisson_times(rate, T, 1);
    const auto h = correlate(t, t, T, 20000.0, bin, true);
    double chi2 = 0.0;
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        const double expect = h.rate_a() * h.rate_b() * (T - std::abs(h.tau(i))) * bin;
        chi2 += std::pow(h.counts[i] - expect, 2) / expect;
    }
    const double dof = static_cast<double>(h.counts.size());
    CHECK(chi2 / dof < 1.0 + 3.0 * std::sqrt(2.0 / dof));
    // symmetric by construction
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        CHECK(h.counts[i] == h.counts[h.counts.size() - 1 - i]);
    for (double b : {16.0, 64.0, 512.0}) {
        const auto g = cw_g2_zero(correlate(t, t, T, 4000.0, b, true));
        CHECK(std::abs(g.value - 1.0) <= 3.0 * g.error);
        CHECK(g.method == G2Method::cw_normalized);
    }
}

TEST_CASE("pulsed peaks form a comb at multiples of the period")
{
    const auto t = pulsed_mixture(3000, 0.5, 600.0, 2);
    const auto h = correlate(t, t, 3000 * kRep, window_for(3), 128.0, true);
    for (int k = 1; k <= 3; ++k) {
        const double mid = peak_area(h, kRep, k);
        CHECK(mid > 0.0);
        const auto idx = static_cast<std::size_t>(h.half_bins + std::lround((k + 0.5) * kRep / 128.0));
        CHECK(h.counts[idx] < 0.01 * mid);
    }
}

TEST_CASE("ideal single photons have zero pulsed g2")
{
    const auto t = pulsed_mixture(20000, 0.0, 600.0, 3);
    const auto g = pulsed_g2_zero(correlate(t, t, 20000 * kRep, window_for(10), 128.0, true), kRep, 10);
    CHECK(g.value == 0.0);
    CHECK(g.error > 0.0);
    CHECK(g.error < 0.01);
}

TEST_CASE("single emitter plus Poisson mean 0.5 gives 5/9")
{
    CHECK(enumerated_g2(0.5) == doctest::Approx(5.0 / 9.0).epsilon(1e-12));
    const std::size_t pulses = 40000;
    const auto t = pulsed_mixture(pulses, 0.5, 600.0, 4);
    const auto g = pulsed_g2_zero(correlate(t, t, pulses * kRep, window_for(10), 128.0, true), kRep, 10);
    CHECK(std::abs(g.value - 5.0 / 9.0) < 0.02);
    CHECK(std::abs(g.value - 5.0 / 9.0) <= 3.0 * g.error);
    const double direct = per_pulse_g2(t, t, kRep, pulses * kRep, true);
    CHECK(std::abs(direct - g.value) <= 3.0 * g.error);
}

TEST_CASE("per-pulse oracle converges to the enumerated value")
{
    for (double mu : {0.1, 1.0, 2.0}) {
        const std::size_t pulses = 60000;
        const auto t = pulsed_mixture(pulses, mu, 300.0, 40 + static_cast<std::uint64_t>(10 * mu));
        const double est = per_pulse_g2(t, t, kRep, pulses * kRep, true);
        CHECK(est == doctest::Approx(enumerated_g2(mu)).epsilon(0.03));
    }
}

TEST_CASE("cross-correlation estimator")
{
    SUBCASE("independent Poisson streams")
    {
        const double T = 40000 * kRep;
        const auto a = poisson_times(5e-5, T, 6), b = poisson_times(5e-5, T, 7);
        const auto g = cross_g2_zero(correlate(a, b, T, window_for(10), 128.0, false), kRep, 10);
        CHECK(std::abs(g.value - 1.0) <= 3.0 * g.error);
    }
    SUBCASE("one photon per pulse split between two channels")
    {
        const auto t = pulsed_mixture(20000, 0.0, 600.0, 8);
        Rng rng(9);
        std::vector<double> a, b;
        for (double x : t)
            (uniform_open(rng) < 0.5 ? a : b).push_back(x);
        const auto g = cross_g2_zero(correlate(a, b, 20000 * kRep, window_for(10), 128.0, false), kRep, 10);
        CHECK(g.value == 0.0);
    }
}

TEST_CASE("merging histograms is exact and order independent")
{
    const auto t = poisson_times(1e-4, 3e7, 10);
    const auto cut1 = std::lower_bound(t.begin(), t.end(), 1e7);
    const auto cut2 = std::lower_bound(t.begin(), t.end(), 2e7);
    std::vector<double> p(t.begin(), cut1), q(cut1, cut2), r(cut2, t.end());
    for (double& x : q)
        x -= 1e7;
    for (double& x : r)
        x -= 2e7;
    const auto hp = correlate(p, p, 1e7, 5000.0, 64.0, true);
    const auto hq = correlate(q, q, 1e7, 5000.0, 64.0, true);
    const auto hr = correlate(r, r, 1e7, 5000.0, 64.0, true);
    const auto left = merge(merge(hp, hq), hr);
    const auto right = merge(hp, merge(hr, hq));
    CHECK(left.counts == right.counts);
    CHECK(left.singles_a == t.size());
    CHECK(left.duration_ps == 3e7);
    const auto other = correlate(p, p, 1e7, 5000.0, 32.0, true);
    CHECK_THROWS_AS(merge(hp, other), std::invalid_argument);
}

TEST_CASE("dark-count subtraction")
{
    SUBCASE("zero dark rate is the identity")
    {
        const auto t = poisson_times(1e-4, 1e8, 11);
        const auto h = correlate(t, t, 1e8, 3000.0, 128.0, true);
        CHECK(subtract_dark_counts(h, 0.0, 0.0).counts == h.counts);
    }
    SUBCASE("a dark-only stream subtracts to zero")
    {
        const double rate = 2e-5, T = 4e9, w = 5000.0;
        const auto t = poisson_times(rate, T, 12);
        const auto h = correlate(t, t, T, w, 500.0, true);
        const auto s = subtract_dark_counts(h, h.rate_a(), h.rate_b());
        double sum = 0.0;
        for (double c : s.counts)
            sum += c;
        // ordered pairs share clicks: add the triple term to the Poisson variance
        const double reach = h.reach_ps();
        const double var = 2.0 * h.total() + 4.0 * std::pow(rate, 3) * T * std::pow(2.0 * reach, 2);
        CHECK(std::abs(sum) <= 3.0 * std::sqrt(var));
    }
    SUBCASE("paired seeds recover the dark-free g2")
    {
        LindbladModel m;
        m.device = SystemParams{Energy{1324122.0}, Energy{1324122.0}, Energy{constants::hbar_ueV_ps / 700.0},
                                Energy{85.0}, Energy{35.0}};
        PumpSchedule pump;
        pump.background_feed_rate = 1.5e-5;
        DetectorModel clean, dark;
        dark.dark_count_rate = 2e-6;
        const double T = 40000 * kRep;
        const auto a = simulate_stream(m, pump, clean, T, 13);
        const auto b = simulate_stream(m, pump, dark, T, 13);
        const auto ta = a.times("CX"), tb = b.times("CXD");
        const auto ga = pulsed_g2_zero(correlate(ta, ta, T, window_for(10), 128.0, true), kRep, 10);
        const auto hb = correlate(tb, tb, T, window_for(10), 128.0, true);
        const double d = static_cast<double>(b.count(ClickChannel::D)) / T;
        const auto gb = pulsed_g2_zero(subtract_dark_counts(hb, d, d), kRep, 10);
        const auto raw = pulsed_g2_zero(hb, kRep, 10);
        CHECK(std::abs(gb.value - ga.value) <= 2.0 * std::hypot(ga.error, gb.error));
        CHECK(raw.value > gb.value);
    }
    SUBCASE("over-subtraction is refused")
    {
        const auto t = poisson_times(1e-5, 1e8, 14);
        const auto h = correlate(t, t, 1e8, 3000.0, 128.0, true);
        CHECK_THROWS_AS(subtract_dark_counts(h, 1e-3, 1e-3), ConfigError);
        // single photons carry no accidental floor to remove
        const auto p = pulsed_mixture(20000, 0.0, 600.0, 20);
        const auto hp = correlate(p, p, 20000 * kRep, window_for(2), 128.0, true);
        CHECK_THROWS_AS(subtract_dark_counts(hp, 0.9 * hp.rate_a(), 0.9 * hp.rate_b()), ConfigError);
    }
}

TEST_CASE("lifetime fit")
{
    auto first_photons = [](std::size_t n, double tau, double jitter, double rep, std::uint64_t seed) {
        Rng rng(seed);
        std::vector<double> t;
        for (std::size_t k = 0; k < n; ++k) {
            double x = exponential(rng, 1.0 / tau) + jitter * standard_normal(rng);
            x = std::clamp(x, 0.0, rep - 1.0);
            t.push_back(static_cast<double>(k) * rep + x);
        }
        std::sort(t.begin(), t.end());
        return t;
    };
    SUBCASE("ten thousand photons recover 620 ps within 10 ps")
    {
        const auto t = first_photons(10000, 620.0, 0.0, kRep, 15);
        const auto f = fit_lifetime(decay_histogram(t, kRep, 16.0));
        CHECK(std::abs(f.tau_ps - 620.0) < 10.0);
        CHECK(f.error_ps == doctest::Approx(6.2).epsilon(0.1));
        CHECK_FALSE(f.non_exponential);
    }
    SUBCASE("scaling time by two scales the lifetime by two")
    {
        auto t = first_photons(10000, 620.0, 0.0, kRep, 16);
        const auto f1 = fit_lifetime(decay_histogram(t, kRep, 16.0));
        for (double& x : t)
            x *= 2.0;
        const auto f2 = fit_lifetime(decay_histogram(t, 2.0 * kRep, 32.0));
        CHECK(f2.tau_ps == doctest::Approx(2.0 * f1.tau_ps).epsilon(1e-6));
    }
    SUBCASE("25 ps jitter biases lifetimes above 200 ps by under 1%")
    {
        for (double tau : {200.0, 620.0}) {
            const auto t = first_photons(400000, tau, 25.0, kRep, 17);
            const auto f = fit_lifetime(decay_histogram(t, kRep, 8.0), 25.0);
            CHECK(std::abs(f.tau_ps - tau) < 0.01 * tau);
        }
    }
    SUBCASE("too few counts")
    {
        CHECK_THROWS_AS(fit_lifetime(decay_histogram(first_photons(50, 620.0, 0.0, kRep, 18), kRep, 16.0)),
                        StatisticsError);
    }
}

TEST_CASE("pulsed estimator needs the histogram to reach the side peaks")
{
    const auto t = pulsed_mixture(200, 0.5, 600.0, 19);
    const auto h = correlate(t, t, 200 * kRep, 3 * kRep, 128.0, true);
    CHECK_THROWS_AS(pulsed_g2_zero(h, kRep, 10), std::invalid_argument);
}
