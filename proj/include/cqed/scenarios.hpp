#pragma once

#include "cqed/config.hpp"
#include "cqed/hbt.hpp"
#include "cqed/trajectory.hpp"

#include <cstdint>

namespace cqed {

// Documented calibration of the pulsed correlation measurements. The
// reservoir mean sets the emitter's own g2(0) to about 0.17; the cavity feed
// makes the detuned dot put 3.07 photons into C per photon into X, and the
// background emitters supply the rest of a 3.5:1 C:X flux ratio.
inline constexpr double kPulsedReservoirMean = 0.0976;
inline constexpr double kPulsedCaptureRate = 0.02;  // 1/ps
inline constexpr double kPulsedDetuningNm = 0.4;    // exciton red of the cavity
inline constexpr double kPulsedCxRatio = 3.5;
inline constexpr double kPulsedBackgroundFraction = 0.122;  // of the C flux

struct PulsedStudySetup {
    LindbladModel resonance;
    LindbladModel detuned;
    PumpSchedule resonance_pump;
    PumpSchedule detuned_pump;  // background feed already calibrated
    double dot_cx_ratio = 0.0;
};

/// Cavity feed rate (1/ps) at which the dot alone yields `ratio` C photons
/// per X photon. Bisection; throws std::domain_error if out of reach.
double cavity_feed_for_ratio(LindbladModel model, double ratio);

PulsedStudySetup pulsed_study_setup(const DeviceConfig& base, double rep_period_ps = 13000.0);

struct PulsedStudyResult {
    G2Estimate rr;  // both channels together, resonant
    G2Estimate xx;
    G2Estimate cc;
    G2Estimate xc;
    double cx_ratio = 0.0;  // measured C:X click ratio, detuned
};

PulsedStudyResult run_pulsed_study(const PulsedStudySetup& setup, std::size_t pulses, std::uint64_t seed, unsigned threads,
                    int n_side = 10, double bin_width_ps = 128.0);

/// Above-band schedule: p = 1 plus a reservoir of the given mean.
PumpSchedule above_band_schedule(double reservoir_mean, double rep_period_ps = 13000.0);

/// Pulsed g2(0) of all clicks for `pump` on `model`.
G2Estimate pulsed_g2_of(const LindbladModel& model, const PumpSchedule& pump, std::size_t pulses,
                        std::uint64_t seed, unsigned threads, const std::string& channels = "CX",
                        int n_side = 10, double bin_width_ps = 128.0);

}  // namespace cqed
