#include "cqed/errors.hpp"
#include "cqed/scenarios.hpp"
#include "cqed/trajectory.hpp"

#include <doctest.h>

#include <cmath>
#include <map>

using namespace cqed;

namespace {

const double kHbar = constants::hbar_ueV_ps;

LindbladModel pillar(double delta = 0.0)
{
    LindbladModel m;
    m.device = SystemParams{Energy{1324122.0 + delta}, Energy{1324122.0}, Energy{kHbar / 700.0}, Energy{85.0},
                            Energy{35.0}};
    return m;
}

}  // namespace

TEST_CASE("ideal single emitter gives at most one click per pulse")
{
    const PumpSchedule pump;
    const auto s = simulate_stream(pillar(), pump, DetectorModel{}, 2000 * pump.rep_period_ps, 1);
    std::map<long, int> per_pulse;
    for (const auto& c : s.clicks)
        ++per_pulse[static_cast<long>(std::floor(c.time_ps / pump.rep_period_ps))];
    for (const auto& [k, n] : per_pulse)
        CHECK(n <= 1);
    // every pulse emits well inside the 13 ns period
    CHECK(s.clicks.size() >= 1990);
}

TEST_CASE("stream format invariants")
{
    PumpSchedule pump;
    pump.reservoir_mean = 0.5;
    pump.capture_rate = 0.02;
    pump.background_feed_rate = 2e-5;
    DetectorModel det;
    det.jitter_ps = 30.0;
    det.dead_time_ps = 50.0;
    det.dark_count_rate = 1e-6;
    const double duration = 3000 * pump.rep_period_ps;
    const auto s = simulate_stream(pillar(200.0), pump, det, duration, 5);
    std::map<ClickChannel, double> last;
    for (std::size_t i = 0; i < s.clicks.size(); ++i) {
        const auto& c = s.clicks[i];
        CHECK(c.time_ps >= 0.0);
        CHECK(c.time_ps < duration);
        CHECK(std::abs(c.time_ps * 10.0 - std::round(c.time_ps * 10.0)) < 1e-6);
        if (i > 0)
            CHECK(s.clicks[i - 1].time_ps <= c.time_ps);
        if (last.count(c.channel))
            CHECK(c.time_ps - last[c.channel] >= 50.0 - 0.1);
        last[c.channel] = c.time_ps;
    }
    CHECK(s.count(ClickChannel::D) > 0);
}

TEST_CASE("trajectory average reproduces the master equation")
{
    const LindbladModel m = pillar(300.0);
    std::vector<double> t;
    for (double x = 0.0; x <= 1500.0; x += 150.0)
        t.push_back(x);
    const auto est = average_exciton_population(m, t, 10000, 77);
    const auto ev = evolve(m, exciton_excited_state(m.hilbert), t);
    const JaynesCummingsSpace s(m.hilbert);
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double exact = expectation(ev.states[k], s.exciton_number);
        CHECK(std::abs(est.mean[k] - exact) <= 3.0 * est.std_error[k] + 1e-12);
    }
}

TEST_CASE("dark counts alone arrive at the configured rate")
{
    PumpSchedule pump;
    pump.excitation_prob = 0.0;
    DetectorModel det;
    det.dark_count_rate = 1e-5;
    const auto s = simulate_stream(pillar(), pump, det, 2e8, 9);
    const auto r = channel_rates(s);
    REQUIRE(r.count(ClickChannel::D) == 1);
    CHECK((r.count(ClickChannel::C) == 0 || r.at(ClickChannel::C).counts == 0));
    CHECK(std::abs(r.at(ClickChannel::D).rate - 1e-5) <= 3.0 * r.at(ClickChannel::D).error);
}

TEST_CASE("detection efficiency thins every channel")
{
    PumpSchedule pump;
    pump.background_feed_rate = 3e-5;
    DetectorModel full, half;
    half.efficiency = 0.5;
    const double duration = 20000 * pump.rep_period_ps;
    const auto a = channel_rates(simulate_stream(pillar(500.0), pump, full, duration, 21));
    const auto b = channel_rates(simulate_stream(pillar(500.0), pump, half, duration, 21));
    for (auto ch : {ClickChannel::C, ClickChannel::X}) {
        const double ratio = b.at(ch).rate / a.at(ch).rate;
        // binomial thinning: var(ratio) = (1 - eta) / (eta n)
        const double sigma = std::sqrt(0.5 / (0.5 * static_cast<double>(a.at(ch).counts)));
        CHECK(std::abs(ratio - 0.5) <= 3.0 * 0.5 * sigma);
    }
}

TEST_CASE("dark counts do not disturb the emitter clicks")
{
    PumpSchedule pump;
    pump.reservoir_mean = 0.3;
    pump.capture_rate = 0.02;
    DetectorModel quiet, noisy;
    noisy.dark_count_rate = 1e-5;
    const double duration = 500 * pump.rep_period_ps;
    const auto a = simulate_stream(pillar(), pump, quiet, duration, 4);
    const auto b = simulate_stream(pillar(), pump, noisy, duration, 4);
    CHECK(a.times("CX") == b.times("CX"));
    CHECK(b.count(ClickChannel::D) > 0);
}

TEST_CASE("streams are reproducible and independent of thread count")
{
    PumpSchedule pump;
    pump.reservoir_mean = 0.2;
    pump.capture_rate = 0.02;
    pump.background_feed_rate = 1e-5;
    DetectorModel det;
    det.efficiency = 0.7;
    det.jitter_ps = 25.0;
    det.dark_count_rate = 1e-6;
    const double duration = 10000 * pump.rep_period_ps;
    SimulationOptions one, three;
    three.threads = 3;
    const auto a = simulate_stream(pillar(100.0), pump, det, duration, 123, one);
    const auto b = simulate_stream(pillar(100.0), pump, det, duration, 123, three);
    const auto c = simulate_stream(pillar(100.0), pump, det, duration, 124, one);
    CHECK(a.clicks == b.clicks);
    CHECK_FALSE(a.clicks == c.clicks);

    LindbladModel cw = pillar();
    cw.exciton_pump = 1e-4;
    PumpSchedule cwp;
    cwp.mode = PumpMode::resonant_cw;
    const auto d = simulate_stream(cw, cwp, det, 3e6, 5, one);
    const auto e = simulate_stream(cw, cwp, det, 3e6, 5, three);
    CHECK(d.clicks == e.clicks);
    CHECK(!d.clicks.empty());
}

TEST_CASE("configuration checks")
{
    PumpSchedule fast;
    fast.rep_period_ps = 100.0;
    CHECK_THROWS_AS(validate_schedule(pillar(500.0), fast), ConfigError);
    PumpSchedule bad;
    bad.excitation_prob = 1.5;
    CHECK_THROWS_AS(validate_schedule(pillar(), bad), ConfigError);
    PumpSchedule cw;
    cw.mode = PumpMode::resonant_cw;
    CHECK_THROWS_AS(validate_schedule(pillar(), cw), ConfigError);
    DetectorModel det;
    det.efficiency = 0.0;
    CHECK_THROWS(det.validate());
    CHECK(parse_pump_mode(to_string(PumpMode::above_band_pulsed)) == PumpMode::above_band_pulsed);
    CHECK_THROWS_AS(parse_pump_mode("laser"), ConfigError);
}

TEST_CASE("empty stream has no rates")
{
    ClickStream s;
    s.duration_ps = 1e6;
    CHECK_THROWS_AS(channel_rates(s), StatisticsError);
}

TEST_CASE("background calibration")
{
    PumpSchedule pump;
    const LindbladModel m = pillar(-565.0);
    const double feed = calibrate_background_feed(m, pump, 3.5);
    CHECK(feed > 0.0);
    const double duration = 40000 * pump.rep_period_ps;
    PumpSchedule with = pump;
    with.background_feed_rate = feed;
    const auto r = channel_rates(simulate_stream(m, with, DetectorModel{}, duration, 31));
    const auto& c = r.at(ClickChannel::C);
    const auto& x = r.at(ClickChannel::X);
    const double ratio = c.rate / x.rate;
    const double sigma = ratio * std::sqrt(1.0 / c.counts + 1.0 / x.counts);
    CHECK(std::abs(ratio - 3.5) <= 3.0 * sigma);
    CHECK_THROWS_AS(calibrate_background_feed(pillar(0.0), pump, 3.5), std::domain_error);
}

TEST_CASE("more uncorrelated light never lowers the pulsed g2")
{
    const LindbladModel m = pillar();
    double prev = -1.0, prev_err = 0.0;
    for (double feed : {0.0, 1e-5, 3e-5, 9e-5, 2.7e-4}) {
        PumpSchedule pump;
        pump.background_feed_rate = feed;
        const auto g = pulsed_g2_of(m, pump, 6000, 55, 1);
        CHECK(g.value >= prev - 3.0 * std::hypot(g.error, prev_err));
        prev = g.value;
        prev_err = g.error;
    }
    CHECK(prev > 0.5);
    double prev_m = -1.0, prev_m_err = 0.0;
    for (double mean : {0.0, 0.25, 1.0, 3.0}) {
        const auto g = pulsed_g2_of(m, above_band_schedule(mean), 4000, 56, 1);
        CHECK(g.value >= prev_m - 3.0 * std::hypot(g.error, prev_m_err));
        prev_m = g.value;
        prev_m_err = g.error;
    }
}
