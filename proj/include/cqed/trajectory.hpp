#pragma once

#include "cqed/click_stream.hpp"
#include "cqed/lindblad.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace cqed {

enum class PumpMode { resonant_pulsed, resonant_cw, above_band_pulsed };

const char* to_string(PumpMode m);
PumpMode parse_pump_mode(const std::string& s);

/// Excitation schedule. Pulses fire at t = k * rep_period_ps. At each pulse
/// the dot is excited with probability excitation_prob and a carrier
/// reservoir is loaded with Poisson(reservoir_mean) carriers; while the
/// reservoir is non-empty, carriers re-excite the ground-state dot at
/// capture_rate. Background emitters add an independent Poisson stream into
/// channel C. In resonant_cw mode the model's exciton_pump drives the dot.
struct PumpSchedule {
    PumpMode mode = PumpMode::resonant_pulsed;
    double rep_period_ps = 13000.0;
    double excitation_prob = 1.0;
    double reservoir_mean = 0.0;
    double capture_rate = 0.0;          // 1/ps
    double background_feed_rate = 0.0;  // 1/ps

    bool pulsed() const { return mode != PumpMode::resonant_cw; }
};

struct DetectorModel {
    double efficiency = 1.0;
    double jitter_ps = 0.0;  // Gaussian sigma
    double dead_time_ps = 0.0;
    double dark_count_rate = 0.0;  // 1/ps

    void validate() const;
};

struct SimulationOptions {
    unsigned threads = 1;
    std::size_t pulses_per_chunk = 4096;
    double cw_chunk_ps = 1048576.0;
    std::string config_hash = "0000000000000000";
};

/// Throws ConfigError when pulses are closer than ten slowest-branch lifetimes
/// or any field is out of range.
void validate_schedule(const LindbladModel& model, const PumpSchedule& pump);

/// Quantum-jump unravelling of `model` under `pump`, followed by detector
/// thinning, jitter, dead time and dark counts. Deterministic in `seed` and
/// independent of `options.threads`.
ClickStream simulate_stream(const LindbladModel& model, const PumpSchedule& pump, const DetectorModel& det,
                            double duration_ps, std::uint64_t seed, const SimulationOptions& options = {});

struct ChannelRate {
    std::size_t counts = 0;
    double rate = 0.0;   // 1/ps
    double error = 0.0;  // Poisson standard error
};

/// Throws StatisticsError on an empty stream.
std::map<ClickChannel, ChannelRate> channel_rates(const ClickStream& stream);

struct PopulationEstimate {
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> std_error;
};

/// Trajectory average of the exciton population starting from |e, 0>.
PopulationEstimate average_exciton_population(const LindbladModel& model, const std::vector<double>& t_grid,
                                              std::size_t n_trajectories, std::uint64_t seed);

/// Expected photons emitted per pulse before detection (excitation_prob plus
/// reservoir_mean, assuming every carrier is captured before the next pulse).
double emitted_per_pulse(const PumpSchedule& pump);

/// Background feed (1/ps) giving a C:X flux ratio of `target_ratio`. Throws
/// std::domain_error when the dot alone already exceeds the target.
double calibrate_background_feed(const LindbladModel& model, const PumpSchedule& pump, double target_ratio);

}  // namespace cqed
