#include "cqed/trajectory.hpp"

#include "cqed/errors.hpp"
#include "cqed/random.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <mutex>
#include <thread>

namespace cqed {

namespace {

using cd = std::complex<double>;
using StateVector = Eigen::VectorXcd;

// exp(K t) for the effective non-Hermitian generator K = -iH/hbar - 1/2 sum L+L.
class NoJumpPropagator {
public:
    explicit NoJumpPropagator(const Eigen::MatrixXcd& k) : k_(k)
    {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(k);
        v_ = es.eigenvectors();
        lambda_ = es.eigenvalues();
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(v_);
        diagonal_ = lu.isInvertible();
        if (diagonal_) {
            vinv_ = lu.inverse();
            const double cond = v_.norm() * vinv_.norm();
            const double recon = (v_ * lambda_.asDiagonal() * vinv_ - k).norm() / (1.0 + k.norm());
            diagonal_ = cond < 1e10 && recon < 1e-10;
        }
        gram_ = v_.adjoint() * v_;
    }

    // Coefficients of psi in whichever representation advance/norm2 use.
    StateVector coefficients(const StateVector& psi) const { return diagonal_ ? StateVector(vinv_ * psi) : psi; }

    StateVector advance(const StateVector& c, double t) const
    {
        if (!diagonal_)
            return (k_ * t).exp() * c;
        StateVector e(c.size());
        for (Eigen::Index i = 0; i < c.size(); ++i)
            e(i) = std::exp(lambda_(i) * t) * c(i);
        return v_ * e;
    }

    double norm2(const StateVector& c, double t) const
    {
        if (!diagonal_)
            return ((k_ * t).exp() * c).squaredNorm();
        StateVector e(c.size());
        for (Eigen::Index i = 0; i < c.size(); ++i)
            e(i) = std::exp(lambda_(i) * t) * c(i);
        return (e.adjoint() * gram_ * e)(0).real();
    }

private:
    Eigen::MatrixXcd k_;
    Eigen::MatrixXcd v_;
    Eigen::MatrixXcd vinv_;
    Eigen::MatrixXcd gram_;
    Eigen::VectorXcd lambda_;
    bool diagonal_ = false;
};

struct Emission {
    double time;
    ClickChannel channel;
};

// Shared, read-only description of the unravelling.
class JumpEngine {
public:
    JumpEngine(const LindbladModel& model, const PumpSchedule& pump)
        : space_(model.hilbert),
          base_(jump_channels(model, space_)),
          capture_op_(std::sqrt(std::max(pump.capture_rate, 0.0)) * space_.sigma_minus.adjoint()),
          no_capture_(generator(model, false)),
          with_capture_(generator(model, true))
    {
        const Operator sp = space_.sigma_minus.adjoint();
        raise_ = sp;
        excited_projector_ = space_.exciton_number;
    }

    const JaynesCummingsSpace& space() const { return space_; }

    StateVector ground() const
    {
        StateVector psi = StateVector::Zero(space_.config.dim());
        psi(space_.index(0, 0)) = 1.0;
        return psi;
    }

    StateVector excited() const
    {
        StateVector psi = StateVector::Zero(space_.config.dim());
        psi(space_.index(1, 0)) = 1.0;
        return psi;
    }

    // Incoherent excitation of a ground-state dot: Kraus pair {sigma+, P_e}.
    void excite(StateVector& psi, Rng& rng) const
    {
        StateVector up = raise_ * psi;
        const double p_up = up.squaredNorm();
        if (uniform_open(rng) < p_up)
            psi = up / std::sqrt(p_up);
        else {
            StateVector keep = excited_projector_ * psi;
            const double n = keep.norm();
            if (n > 0.0)
                psi = keep / n;
        }
    }

    // Runs the no-jump/jump cycle on [t0, t1). Reservoir carriers are
    // consumed by capture jumps.
    template <class Record>
    void run(StateVector& psi, double t0, double t1, long& reservoir, Rng& rng, Record&& record) const
    {
        double t = t0;
        while (t < t1) {
            const bool capturing = reservoir > 0 && capture_op_.norm() > 0.0;
            const NoJumpPropagator& prop = capturing ? with_capture_ : no_capture_;
            const double r = uniform_open(rng);
            const StateVector c = prop.coefficients(psi);
            const double span = t1 - t;
            if (prop.norm2(c, span) > r) {
                psi = prop.advance(c, span);
                psi.normalize();
                return;
            }
            double lo = 0.0, hi = span;
            for (int it = 0; it < 80 && hi - lo > 1e-6; ++it) {
                const double mid = 0.5 * (lo + hi);
                (prop.norm2(c, mid) > r ? lo : hi) = mid;
            }
            const double tau = 0.5 * (lo + hi);
            psi = prop.advance(c, tau);
            t += tau;

            // Pick the collapse channel.
            double total = 0.0;
            std::vector<double> w(base_.size() + 1, 0.0);
            for (std::size_t k = 0; k < base_.size(); ++k)
                total += (w[k] = (base_[k].op * psi).squaredNorm());
            if (capturing)
                total += (w.back() = (capture_op_ * psi).squaredNorm());
            if (!(total > 0.0)) {
                psi.normalize();
                continue;
            }
            double u = uniform_open(rng) * total;
            std::size_t pick = 0;
            for (; pick + 1 < w.size(); ++pick) {
                if (u < w[pick])
                    break;
                u -= w[pick];
            }
            if (pick >= base_.size()) {
                psi = capture_op_ * psi;
                --reservoir;
            } else {
                psi = base_[pick].op * psi;
                if (base_[pick].emits)
                    record(t, *base_[pick].emits == Channel::C ? ClickChannel::C : ClickChannel::X);
            }
            psi.normalize();
        }
    }

private:
    Eigen::MatrixXcd generator(const LindbladModel& model, bool capture) const
    {
        const cd i{0.0, 1.0};
        Eigen::MatrixXcd k = -i * hamiltonian(model, space_) / constants::hbar_ueV_ps;
        for (const auto& ch : base_)
            k -= 0.5 * ch.op.adjoint() * ch.op;
        if (capture)
            k -= 0.5 * capture_op_.adjoint() * capture_op_;
        return k;
    }

    JaynesCummingsSpace space_;
    std::vector<JumpChannel> base_;
    Operator capture_op_;
    NoJumpPropagator no_capture_;
    NoJumpPropagator with_capture_;
    Operator raise_;
    Operator excited_projector_;
};

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn)
{
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            }
        });
    for (auto& th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

// Samples a pure state from the eigen-mixture of rho.
StateVector sample_from_density(const Density& rho, Rng& rng)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
    const auto& p = es.eigenvalues();
    double total = 0.0;
    for (Eigen::Index k = 0; k < p.size(); ++k)
        total += std::max(p(k), 0.0);
    double u = uniform_open(rng) * total;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        const double pk = std::max(p(k), 0.0);
        if (u < pk || k + 1 == p.size())
            return es.eigenvectors().col(k);
        u -= pk;
    }
    return es.eigenvectors().col(p.size() - 1);
}

void poisson_process(double t0, double t1, double rate, ClickChannel ch, Rng& rng, std::vector<Emission>& out)
{
    if (!(rate > 0.0))
        return;
    double t = t0 + exponential(rng, rate);
    while (t < t1) {
        out.push_back({t, ch});
        t += exponential(rng, rate);
    }
}

struct ChunkSpan {
    double t0;
    double t1;
    std::size_t first_pulse;
    std::size_t end_pulse;
};

}  // namespace

const char* to_string(PumpMode m)
{
    switch (m) {
    case PumpMode::resonant_pulsed:
        return "resonant_pulsed";
    case PumpMode::resonant_cw:
        return "resonant_cw";
    case PumpMode::above_band_pulsed:
        return "above_band_pulsed";
    }
    return "resonant_pulsed";
}

PumpMode parse_pump_mode(const std::string& s)
{
    if (s == "resonant_pulsed")
        return PumpMode::resonant_pulsed;
    if (s == "resonant_cw")
        return PumpMode::resonant_cw;
    if (s == "above_band_pulsed")
        return PumpMode::above_band_pulsed;
    throw ConfigError("unknown pump mode '" + s + "'");
}

void DetectorModel::validate() const
{
    if (!(efficiency > 0.0 && efficiency <= 1.0))
        throw ConfigError("detector efficiency must be in (0, 1]");
    if (jitter_ps < 0.0 || dead_time_ps < 0.0 || dark_count_rate < 0.0)
        throw ConfigError("detector jitter, dead time and dark rate must be >= 0");
}

void validate_schedule(const LindbladModel& model, const PumpSchedule& pump)
{
    try {
        model.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (pump.excitation_prob < 0.0 || pump.excitation_prob > 1.0)
        throw ConfigError("excitation_prob must be in [0, 1]");
    if (pump.reservoir_mean < 0.0 || pump.capture_rate < 0.0 || pump.background_feed_rate < 0.0)
        throw ConfigError("reservoir_mean, capture_rate and background_feed_rate must be >= 0");
    if (pump.reservoir_mean > 0.0 && !(pump.capture_rate > 0.0))
        throw ConfigError("a loaded reservoir needs capture_rate > 0");
    if (pump.pulsed()) {
        const auto e = eigen_energies(model.device);
        const double slowest = constants::hbar_ueV_ps / std::min(fwhm_of(e.upper), fwhm_of(e.lower));
        if (!(pump.rep_period_ps > 10.0 * slowest))
            throw ConfigError("rep_period_ps must exceed ten times the slowest branch lifetime (" +
                              std::to_string(10.0 * slowest) + " ps)");
    } else if (!(model.exciton_pump > 0.0)) {
        throw ConfigError("resonant_cw mode needs exciton_pump > 0");
    }
}

ClickStream simulate_stream(const LindbladModel& model, const PumpSchedule& pump, const DetectorModel& det,
                            double duration_ps, std::uint64_t seed, const SimulationOptions& options)
{
    validate_schedule(model, pump);
    det.validate();
    if (!(duration_ps > 0.0))
        throw ConfigError("duration must be > 0");

    const JumpEngine engine(model, pump);

    std::vector<ChunkSpan> chunks;
    if (pump.pulsed()) {
        const auto n_pulses = static_cast<std::size_t>(std::ceil(duration_ps / pump.rep_period_ps));
        const std::size_t per = std::max<std::size_t>(1, options.pulses_per_chunk);
        for (std::size_t k = 0; k < n_pulses; k += per) {
            const std::size_t end = std::min(n_pulses, k + per);
            chunks.push_back({static_cast<double>(k) * pump.rep_period_ps,
                              std::min(duration_ps, static_cast<double>(end) * pump.rep_period_ps), k, end});
        }
    } else {
        for (double t = 0.0; t < duration_ps; t += options.cw_chunk_ps)
            chunks.push_back({t, std::min(duration_ps, t + options.cw_chunk_ps), 0, 0});
    }

    Density stationary;
    if (!pump.pulsed())
        stationary = steady_state(model);

    std::vector<std::vector<Emission>> results(chunks.size());
    parallel_for(chunks.size(), options.threads, [&](std::size_t ci) {
        const ChunkSpan& span = chunks[ci];
        std::vector<Emission> physical;
        Rng phys = make_rng(seed, StreamPurpose::physics, ci);
        auto record = [&](double t, ClickChannel ch) { physical.push_back({t, ch}); };
        long reservoir = 0;
        if (pump.pulsed()) {
            StateVector psi = engine.ground();
            for (std::size_t k = span.first_pulse; k < span.end_pulse; ++k) {
                const double tp = static_cast<double>(k) * pump.rep_period_ps;
                const double tn = std::min(duration_ps, tp + pump.rep_period_ps);
                reservoir = poisson(phys, pump.reservoir_mean);
                if (uniform_open(phys) < pump.excitation_prob)
                    engine.excite(psi, phys);
                engine.run(psi, tp, tn, reservoir, phys, record);
            }
        } else {
            StateVector psi = sample_from_density(stationary, phys);
            engine.run(psi, span.t0, span.t1, reservoir, phys, record);
        }

        Rng bg = make_rng(seed, StreamPurpose::background, ci);
        poisson_process(span.t0, span.t1, pump.background_feed_rate, ClickChannel::C, bg, physical);
        std::stable_sort(physical.begin(), physical.end(),
                         [](const Emission& a, const Emission& b) { return a.time < b.time; });

        std::vector<Emission> detected;
        detected.reserve(physical.size());
        Rng dr = make_rng(seed, StreamPurpose::detector, ci);
        for (const auto& e : physical) {
            const double u = uniform_open(dr);
            const double jitter = det.jitter_ps > 0.0 ? det.jitter_ps * standard_normal(dr) : 0.0;
            if (u < det.efficiency)
                detected.push_back({e.time + jitter, e.channel});
        }
        Rng dk = make_rng(seed, StreamPurpose::dark, ci);
        poisson_process(span.t0, span.t1, det.dark_count_rate, ClickChannel::D, dk, detected);
        results[ci] = std::move(detected);
    });

    std::vector<Emission> all;
    for (auto& r : results)
        all.insert(all.end(), r.begin(), r.end());
    std::stable_sort(all.begin(), all.end(), [](const Emission& a, const Emission& b) {
        if (a.time != b.time)
            return a.time < b.time;
        return static_cast<char>(a.channel) < static_cast<char>(b.channel);
    });

    ClickStream out;
    out.duration_ps = duration_ps;
    out.seed = seed;
    out.config_hash = options.config_hash;
    double last[3] = {-INFINITY, -INFINITY, -INFINITY};
    auto slot = [](ClickChannel c) { return c == ClickChannel::C ? 0 : c == ClickChannel::X ? 1 : 2; };
    for (const auto& e : all) {
        if (e.time < 0.0 || e.time >= duration_ps)
            continue;
        double& l = last[slot(e.channel)];
        if (det.dead_time_ps > 0.0 && e.time - l < det.dead_time_ps)
            continue;
        l = e.time;
        out.clicks.push_back({quantize_time(e.time), e.channel});
    }
    return out;
}

std::map<ClickChannel, ChannelRate> channel_rates(const ClickStream& stream)
{
    if (stream.clicks.empty() || !(stream.duration_ps > 0.0))
        throw StatisticsError("channel_rates: stream holds no clicks");
    std::map<ClickChannel, ChannelRate> out;
    for (ClickChannel c : {ClickChannel::C, ClickChannel::X, ClickChannel::D}) {
        ChannelRate r;
        r.counts = stream.count(c);
        r.rate = static_cast<double>(r.counts) / stream.duration_ps;
        r.error = std::sqrt(static_cast<double>(std::max<std::size_t>(r.counts, 1))) / stream.duration_ps;
        out[c] = r;
    }
    return out;
}

PopulationEstimate average_exciton_population(const LindbladModel& model, const std::vector<double>& t_grid,
                                              std::size_t n_trajectories, std::uint64_t seed)
{
    model.validate();
    if (n_trajectories < 2)
        throw std::invalid_argument("need at least two trajectories");
    for (std::size_t k = 1; k < t_grid.size(); ++k)
        if (!(t_grid[k] > t_grid[k - 1]))
            throw std::invalid_argument("time grid must be increasing");
    const JumpEngine engine(model, PumpSchedule{});
    const Operator& nx = engine.space().exciton_number;
    std::vector<double> sum(t_grid.size(), 0.0), sum2(t_grid.size(), 0.0);
    for (std::size_t i = 0; i < n_trajectories; ++i) {
        Rng rng = make_rng(seed, StreamPurpose::physics, i);
        StateVector psi = engine.excited();
        long reservoir = 0;
        double t = 0.0;
        for (std::size_t k = 0; k < t_grid.size(); ++k) {
            if (t_grid[k] > t)
                engine.run(psi, t, t_grid[k], reservoir, rng, [](double, ClickChannel) {});
            t = std::max(t, t_grid[k]);
            const double p = (psi.adjoint() * nx * psi)(0).real() / psi.squaredNorm();
            sum[k] += p;
            sum2[k] += p * p;
        }
    }
    PopulationEstimate out;
    out.times = t_grid;
    const double n = static_cast<double>(n_trajectories);
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        const double m = sum[k] / n;
        const double var = std::max(0.0, (sum2[k] / n - m * m) * n / (n - 1.0));
        out.mean.push_back(m);
        out.std_error.push_back(std::sqrt(var / n));
    }
    return out;
}

double emitted_per_pulse(const PumpSchedule& pump)
{
    return pump.excitation_prob + pump.reservoir_mean;
}

double calibrate_background_feed(const LindbladModel& model, const PumpSchedule& pump, double target_ratio)
{
    if (!pump.pulsed())
        throw std::invalid_argument("background calibration needs a pulsed schedule");
    LindbladModel quiet = model;
    quiet.exciton_pump = 0.0;
    const ChannelYields y = channel_yields(quiet);
    const double n = emitted_per_pulse(pump);
    const double rate = (target_ratio * y.exciton - y.cavity) * n / pump.rep_period_ps;
    if (rate < 0.0)
        throw std::domain_error("the dot alone already exceeds the requested C:X ratio");
    return rate;
}

}  // namespace cqed
