#include "cqed/config.hpp"

#include "cqed/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace cqed {

using nlohmann::json;

SystemParams DeviceConfig::params() const
{
    const Energy cavity = wavelength_to_energy(Wavelength{cavity_nm});
    SystemParams p{Energy{cavity.value + detuning_ueV}, cavity, lifetime_to_linewidth(Duration{exciton_lifetime_ps}),
                   Energy{gamma_c_ueV}, Energy{coupling_ueV}};
    return p;
}

LindbladModel DeviceConfig::model() const
{
    LindbladModel m;
    m.device = params();
    m.exciton_pump = exciton_pump_per_ps;
    m.cavity_feed = cavity_feed_per_ps;
    m.pure_dephasing = pure_dephasing_per_ps;
    m.hilbert.n_max = n_max;
    return m;
}

PumpSchedule RunConfig::resolved_pump() const
{
    PumpSchedule p = pump;
    if (target_cx_ratio) {
        try {
            p.background_feed_rate = calibrate_background_feed(device.model(), pump, *target_cx_ratio);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("pump.target_cx_ratio: ") + e.what());
        }
    }
    return p;
}

namespace {

// Reads one JSON object, consuming known keys and rejecting the rest.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            throw ConfigError(path_ + ": expected an object");
    }

    ~Section() noexcept(false)
    {
        if (std::uncaught_exceptions() > 0)
            return;
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key))
                throw ConfigError(field(key) + ": unknown key");
    }

    void number(const char* key, double& out, double lo, double hi, bool open_lo = false)
    {
        if (!take(key))
            return;
        const json& v = j_.at(key);
        if (!v.is_number())
            throw ConfigError(field(key) + ": expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x) || x < lo || x > hi || (open_lo && x == lo))
            throw ConfigError(field(key) + ": value " + v.dump() + " out of range");
        out = x;
    }

    void integer(const char* key, int& out, int lo, int hi)
    {
        if (!take(key))
            return;
        const json& v = j_.at(key);
        if (!v.is_number_integer() || v.get<long long>() < lo || v.get<long long>() > hi)
            throw ConfigError(field(key) + ": expected an integer in [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]");
        out = v.get<int>();
    }

    void text(const char* key, std::string& out)
    {
        if (!take(key))
            return;
        if (!j_.at(key).is_string())
            throw ConfigError(field(key) + ": expected a string");
        out = j_.at(key).get<std::string>();
    }

    const json* object(const char* key)
    {
        return take(key) ? &j_.at(key) : nullptr;
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    bool take(const char* key)
    {
        seen_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

constexpr double kInf = 1e300;

void read_tuning(const json& j, TuningCalibration& t)
{
    Section s(j, "device.tuning");
    s.number("resonance_nm", t.resonance_nm, 0.0, kInf, true);
    s.number("resonance_K", t.resonance_K, 0.0, kInf, true);
    s.number("cavity_slope_nm_per_K", t.cavity_slope, 0.0, kInf);
    s.number("relative_shift_nm", t.relative_shift_nm, 0.0, kInf, true);
    s.number("t_min_K", t.t_min, 0.0, kInf, true);
    s.number("t_max_K", t.t_max, 0.0, kInf, true);
    if (!(t.t_max > t.t_min))
        throw ConfigError("device.tuning.t_max_K: must exceed t_min_K");
    if (t.resonance_K < t.t_min || t.resonance_K > t.t_max)
        throw ConfigError("device.tuning.resonance_K: outside [t_min_K, t_max_K]");
}

void read_device(const json& j, DeviceConfig& d)
{
    Section s(j, "device");
    s.number("cavity_nm", d.cavity_nm, 0.0, kInf, true);
    s.number("detuning_ueV", d.detuning_ueV, -kInf, kInf);
    s.number("coupling_ueV", d.coupling_ueV, 0.0, kInf);
    s.number("gamma_c_ueV", d.gamma_c_ueV, 0.0, kInf, true);
    s.number("exciton_lifetime_ps", d.exciton_lifetime_ps, 0.0, kInf, true);
    s.number("exciton_pump_per_ps", d.exciton_pump_per_ps, 0.0, kInf);
    s.number("cavity_feed_per_ps", d.cavity_feed_per_ps, 0.0, kInf);
    s.number("pure_dephasing_per_ps", d.pure_dephasing_per_ps, 0.0, kInf);
    s.integer("n_max", d.n_max, 1, 12);
    if (const json* t = s.object("tuning"))
        read_tuning(*t, d.tuning);
}

void read_pump(const json& j, RunConfig& c)
{
    Section s(j, "pump");
    std::string mode = to_string(c.pump.mode);
    s.text("mode", mode);
    try {
        c.pump.mode = parse_pump_mode(mode);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("pump.mode: ") + e.what());
    }
    s.number("rep_period_ps", c.pump.rep_period_ps, 0.0, kInf, true);
    s.number("excitation_prob", c.pump.excitation_prob, 0.0, 1.0);
    s.number("reservoir_mean", c.pump.reservoir_mean, 0.0, 1e3);
    s.number("capture_rate_per_ps", c.pump.capture_rate, 0.0, kInf);
    s.number("background_feed_rate_per_ps", c.pump.background_feed_rate, 0.0, kInf);
    double ratio = -1.0;
    s.number("target_cx_ratio", ratio, 0.0, kInf, true);
    if (ratio > 0.0)
        c.target_cx_ratio = ratio;
}

void read_detectors(const json& j, DetectorModel& d)
{
    Section s(j, "detectors");
    s.number("efficiency", d.efficiency, 0.0, 1.0, true);
    s.number("jitter_ps", d.jitter_ps, 0.0, kInf);
    s.number("dead_time_ps", d.dead_time_ps, 0.0, kInf);
    s.number("dark_count_rate_per_ps", d.dark_count_rate, 0.0, kInf);
}

void read_analysis(const json& j, AnalysisConfig& a)
{
    Section s(j, "analysis");
    s.number("bin_width_ps", a.bin_width_ps, 0.0, kInf, true);
    s.number("window_ps", a.window_ps, 0.0, kInf, true);
    s.integer("n_side", a.n_side, 1, 1000);
    s.number("duration_ps", a.duration_ps, 0.0, kInf, true);
    s.number("t_min_K", a.t_min_K, 0.0, kInf, true);
    s.number("t_max_K", a.t_max_K, 0.0, kInf, true);
    s.number("t_step_K", a.t_step_K, 0.0, kInf, true);
    if (!(a.t_max_K >= a.t_min_K))
        throw ConfigError("analysis.t_max_K: must not be below t_min_K");
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    {
        Section s(j, "");
        if (const json* d = s.object("device"))
            read_device(*d, c.device);
        if (const json* p = s.object("pump"))
            read_pump(*p, c);
        if (const json* d = s.object("detectors"))
            read_detectors(*d, c.detectors);
        if (const json* a = s.object("analysis"))
            read_analysis(*a, c.analysis);
        if (const json* seed = s.object("seed")) {
            if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<long long>() >= 0))
                throw ConfigError("seed: expected a non-negative integer");
            c.seed = seed->get<std::uint64_t>();
        }
    }
    try {
        c.device.model().validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("device: ") + e.what());
    }
    return c;
}

RunConfig load_run_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::string canonical_json(const RunConfig& c)
{
    const auto& d = c.device;
    const auto& t = d.tuning;
    json j;
    j["device"] = {{"cavity_nm", d.cavity_nm},
                   {"detuning_ueV", d.detuning_ueV},
                   {"coupling_ueV", d.coupling_ueV},
                   {"gamma_c_ueV", d.gamma_c_ueV},
                   {"exciton_lifetime_ps", d.exciton_lifetime_ps},
                   {"exciton_pump_per_ps", d.exciton_pump_per_ps},
                   {"cavity_feed_per_ps", d.cavity_feed_per_ps},
                   {"pure_dephasing_per_ps", d.pure_dephasing_per_ps},
                   {"n_max", d.n_max},
                   {"tuning",
                    {{"resonance_nm", t.resonance_nm},
                     {"resonance_K", t.resonance_K},
                     {"cavity_slope_nm_per_K", t.cavity_slope},
                     {"relative_shift_nm", t.relative_shift_nm},
                     {"t_min_K", t.t_min},
                     {"t_max_K", t.t_max}}}};
    j["pump"] = {{"mode", to_string(c.pump.mode)},
                 {"rep_period_ps", c.pump.rep_period_ps},
                 {"excitation_prob", c.pump.excitation_prob},
                 {"reservoir_mean", c.pump.reservoir_mean},
                 {"capture_rate_per_ps", c.pump.capture_rate},
                 {"background_feed_rate_per_ps", c.pump.background_feed_rate},
                 {"target_cx_ratio", c.target_cx_ratio ? json(*c.target_cx_ratio) : json(nullptr)}};
    j["detectors"] = {{"efficiency", c.detectors.efficiency},
                      {"jitter_ps", c.detectors.jitter_ps},
                      {"dead_time_ps", c.detectors.dead_time_ps},
                      {"dark_count_rate_per_ps", c.detectors.dark_count_rate}};
    const auto& a = c.analysis;
    j["analysis"] = {{"bin_width_ps", a.bin_width_ps}, {"window_ps", a.window_ps},
                     {"n_side", a.n_side},             {"duration_ps", a.duration_ps},
                     {"t_min_K", a.t_min_K},           {"t_max_K", a.t_max_K},
                     {"t_step_K", a.t_step_K}};
    j["seed"] = c.seed;
    return j.dump();
}

std::string config_hash(const RunConfig& c)
{
    return fnv1a_hex(canonical_json(c));
}

}  // namespace cqed
