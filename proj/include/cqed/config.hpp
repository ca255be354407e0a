#pragma once

#include "cqed/lindblad.hpp"
#include "cqed/spectral_fit.hpp"
#include "cqed/trajectory.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace cqed {

/// Device section: the cavity is placed at cavity_nm and the exciton is
/// detuned from it by detuning_ueV (exciton minus cavity).
struct DeviceConfig {
    double cavity_nm = 936.35;
    double detuning_ueV = 0.0;
    double coupling_ueV = 35.0;
    double gamma_c_ueV = 85.0;
    double exciton_lifetime_ps = 700.0;
    double exciton_pump_per_ps = 0.0;
    double cavity_feed_per_ps = 0.0;
    double pure_dephasing_per_ps = 0.0;
    int n_max = 2;
    TuningCalibration tuning;

    SystemParams params() const;
    LindbladModel model() const;
};

struct AnalysisConfig {
    double bin_width_ps = 128.0;
    double window_ps = 13.0 * 13000.0;
    int n_side = 10;
    double duration_ps = 13000.0 * 100000.0;
    double t_min_K = 6.0;
    double t_max_K = 40.0;
    double t_step_K = 0.5;
};

struct RunConfig {
    DeviceConfig device;
    PumpSchedule pump;
    std::optional<double> target_cx_ratio;  // calibrates pump.background_feed_rate when set
    DetectorModel detectors;
    AnalysisConfig analysis;
    std::uint64_t seed = 20070416;

    /// Schedule with the background feed resolved from target_cx_ratio.
    PumpSchedule resolved_pump() const;
};

/// Parses and schema-checks a JSON document. Missing keys take their
/// defaults; unknown keys, wrong types and out-of-range values throw
/// ConfigError naming the offending field, e.g. "device.gamma_c_ueV".
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

/// Canonical JSON with every field present and keys sorted.
std::string canonical_json(const RunConfig& c);

/// FNV-1a of canonical_json.
std::string config_hash(const RunConfig& c);

}  // namespace cqed
