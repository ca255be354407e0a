#include "cqed/scenarios.hpp"

#include <cmath>
#include <stdexcept>

namespace cqed {

double cavity_feed_for_ratio(LindbladModel model, double ratio)
{
    model.exciton_pump = 0.0;
    auto ratio_at = [&](double feed) {
        model.cavity_feed = feed;
        const auto y = channel_yields(model);
        return y.cavity / y.exciton;
    };
    double lo = 0.0;
    if (ratio_at(lo) >= ratio)
        return 0.0;
    double hi = 1e-4;
    while (ratio_at(hi) < ratio) {
        lo = hi;
        hi *= 2.0;
        if (hi > 10.0)
            throw std::domain_error("cavity_feed_for_ratio: ratio out of reach");
    }
    for (int it = 0; it < 100 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ratio_at(mid) < ratio ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

PulsedStudySetup pulsed_study_setup(const DeviceConfig& base, double rep_period_ps)
{
    PulsedStudySetup s;
    DeviceConfig res = base;
    res.detuning_ueV = 0.0;
    res.exciton_pump_per_ps = 0.0;
    res.cavity_feed_per_ps = 0.0;
    s.resonance = res.model();

    DeviceConfig det = res;
    const Energy ec = wavelength_to_energy(Wavelength{base.cavity_nm});
    const Energy ex = wavelength_to_energy(Wavelength{base.cavity_nm + kPulsedDetuningNm});
    det.detuning_ueV = ex.value - ec.value;
    s.detuned = det.model();
    s.dot_cx_ratio = kPulsedCxRatio * (1.0 - kPulsedBackgroundFraction);
    s.detuned.cavity_feed = cavity_feed_for_ratio(s.detuned, s.dot_cx_ratio);

    PumpSchedule p;
    p.mode = PumpMode::resonant_pulsed;
    p.rep_period_ps = rep_period_ps;
    p.excitation_prob = 1.0;
    p.reservoir_mean = kPulsedReservoirMean;
    p.capture_rate = kPulsedCaptureRate;
    s.resonance_pump = p;
    s.detuned_pump = p;
    s.detuned_pump.background_feed_rate = calibrate_background_feed(s.detuned, p, kPulsedCxRatio);
    return s;
}

PulsedStudyResult run_pulsed_study(const PulsedStudySetup& setup, std::size_t pulses, std::uint64_t seed, unsigned threads, int n_side,
                    double bin_width_ps)
{
    SimulationOptions opt;
    opt.threads = threads;
    const DetectorModel ideal;
    PulsedStudyResult r;
    const double rep = setup.resonance_pump.rep_period_ps;
    const double duration = static_cast<double>(pulses) * rep;
    const double window = (n_side + 0.5) * rep + bin_width_ps;

    const ClickStream res = simulate_stream(setup.resonance, setup.resonance_pump, ideal, duration, seed, opt);
    r.rr = pulsed_g2_zero(correlate(res, "CX", "CX", window, bin_width_ps), rep, n_side);

    const ClickStream det = simulate_stream(setup.detuned, setup.detuned_pump, ideal, duration, seed + 1, opt);
    r.xx = pulsed_g2_zero(correlate(det, "X", "X", window, bin_width_ps), rep, n_side);
    r.cc = pulsed_g2_zero(correlate(det, "C", "C", window, bin_width_ps), rep, n_side);
    r.xc = cross_g2_zero(correlate(det, "X", "C", window, bin_width_ps), rep, n_side);
    r.cx_ratio = static_cast<double>(det.count(ClickChannel::C)) / static_cast<double>(det.count(ClickChannel::X));
    return r;
}

PumpSchedule above_band_schedule(double reservoir_mean, double rep_period_ps)
{
    PumpSchedule p;
    p.mode = PumpMode::above_band_pulsed;
    p.rep_period_ps = rep_period_ps;
    p.excitation_prob = 1.0;
    p.reservoir_mean = reservoir_mean;
    p.capture_rate = kPulsedCaptureRate;
    return p;
}

G2Estimate pulsed_g2_of(const LindbladModel& model, const PumpSchedule& pump, std::size_t pulses, std::uint64_t seed,
                        unsigned threads, const std::string& channels, int n_side, double bin_width_ps)
{
    SimulationOptions opt;
    opt.threads = threads;
    const double duration = static_cast<double>(pulses) * pump.rep_period_ps;
    const ClickStream s = simulate_stream(model, pump, DetectorModel{}, duration, seed, opt);
    const double window = (n_side + 0.5) * pump.rep_period_ps + bin_width_ps;
    return pulsed_g2_zero(correlate(s, channels, channels, window, bin_width_ps), pump.rep_period_ps, n_side);
}

}  // namespace cqed
