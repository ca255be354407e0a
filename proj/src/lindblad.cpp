#include "cqed/lindblad.hpp"

#include "cqed/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace cqed {

namespace {

using cd = std::complex<double>;

constexpr double kTraceTolerance = 1e-8;
constexpr double kCutoffTolerance = 1e-6;

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b)
{
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Eigen::VectorXcd vec(const Eigen::MatrixXcd& m)
{
    return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, Eigen::Index dim)
{
    return Eigen::Map<const Eigen::MatrixXcd>(v.data(), dim, dim);
}

// Row vector r with r * vec(X) = Tr(A X).
Eigen::RowVectorXcd trace_functional(const Operator& a)
{
    const Operator at = a.transpose();
    return Eigen::Map<const Eigen::RowVectorXcd>(at.data(), at.size());
}

void check_cutoff(const Density& rho, const JaynesCummingsSpace& space)
{
    const double top = expectation(rho, space.top_fock_projector());
    if (top > kCutoffTolerance)
        throw ConvergenceError("cavity population at the Fock cutoff exceeds 1e-6: increase n_max");
}

// Solves L Y = rhs with Tr Y = trace_value (least squares on the augmented system).
Density solve_with_trace(const Eigen::MatrixXcd& L, const Density& rhs, cd trace_value)
{
    const Eigen::Index d2 = L.rows();
    const auto dim = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(d2))));
    Eigen::MatrixXcd aug(d2 + 1, d2);
    aug.topRows(d2) = L;
    aug.row(d2) = trace_functional(Operator::Identity(dim, dim));
    Eigen::VectorXcd b(d2 + 1);
    b.head(d2) = vec(rhs);
    b(d2) = trace_value;
    const Eigen::VectorXcd y = aug.colPivHouseholderQr().solve(b);
    const double resid = (aug * y - b).norm();
    if (!(resid < 1e-8 * (1.0 + b.norm())))
        throw ConvergenceError("linear solve on the Liouvillian did not converge");
    return unvec(y, dim);
}

Operator lowering_for(Channel c, const JaynesCummingsSpace& space)
{
    return c == Channel::C ? space.a : space.sigma_minus;
}

double emission_rate(Channel c, const SystemParams& p)
{
    const double gamma = c == Channel::C ? p.gamma_c.value : p.gamma_x.value;
    return gamma / constants::hbar_ueV_ps;
}

}  // namespace

const char* to_string(Channel c)
{
    return c == Channel::C ? "C" : "X";
}

void LindbladModel::validate() const
{
    device.validate();
    if (exciton_pump < 0.0 || cavity_feed < 0.0 || pure_dephasing < 0.0)
        throw std::invalid_argument("Lindblad rates must be >= 0");
    if (hilbert.n_max < 1)
        throw std::invalid_argument("n_max must be >= 1");
}

JaynesCummingsSpace::JaynesCummingsSpace(HilbertConfig cfg) : config(cfg)
{
    if (cfg.n_max < 1)
        throw std::invalid_argument("n_max must be >= 1");
    const int d = cfg.dim();
    identity = Operator::Identity(d, d);
    sigma_minus = Operator::Zero(d, d);
    a = Operator::Zero(d, d);
    for (int n = 0; n <= cfg.n_max; ++n) {
        sigma_minus(index(0, n), index(1, n)) = 1.0;
        if (n > 0)
            for (int q = 0; q < 2; ++q)
                a(index(q, n - 1), index(q, n)) = std::sqrt(static_cast<double>(n));
    }
    exciton_number = sigma_minus.adjoint() * sigma_minus;
    photon_number = a.adjoint() * a;
}

Operator JaynesCummingsSpace::top_fock_projector() const
{
    Operator p = Operator::Zero(config.dim(), config.dim());
    for (int q = 0; q < 2; ++q)
        p(index(q, config.n_max), index(q, config.n_max)) = 1.0;
    return p;
}

Operator hamiltonian(const LindbladModel& model, const JaynesCummingsSpace& space)
{
    const auto& p = model.device;
    const double delta = p.exciton.value - p.cavity.value;
    const double g = p.coupling.value;
    const Operator sp = space.sigma_minus.adjoint();
    return delta * space.exciton_number + g * (space.a.adjoint() * space.sigma_minus + space.a * sp);
}

std::vector<JumpChannel> jump_channels(const LindbladModel& model, const JaynesCummingsSpace& space)
{
    const auto& p = model.device;
    std::vector<JumpChannel> out;
    out.push_back({"cavity_decay", std::sqrt(p.gamma_c.value / constants::hbar_ueV_ps) * space.a, Channel::C});
    out.push_back({"exciton_decay", std::sqrt(p.gamma_x.value / constants::hbar_ueV_ps) * space.sigma_minus,
                   Channel::X});
    if (model.exciton_pump > 0.0)
        out.push_back({"exciton_pump", std::sqrt(model.exciton_pump) * space.sigma_minus.adjoint(), std::nullopt});
    if (model.cavity_feed > 0.0)
        out.push_back({"cavity_feed", std::sqrt(model.cavity_feed) * (space.a.adjoint() * space.sigma_minus),
                       std::nullopt});
    if (model.pure_dephasing > 0.0)
        out.push_back({"dephasing", std::sqrt(model.pure_dephasing) * space.exciton_number, std::nullopt});
    return out;
}

Eigen::MatrixXcd liouvillian(const LindbladModel& model)
{
    model.validate();
    const JaynesCummingsSpace space(model.hilbert);
    const Operator h = hamiltonian(model, space) / constants::hbar_ueV_ps;
    const Operator& id = space.identity;
    const cd i{0.0, 1.0};
    Eigen::MatrixXcd L = -i * (kron(id, h) - kron(h.transpose(), id));
    for (const auto& ch : jump_channels(model, space)) {
        const Operator ldl = ch.op.adjoint() * ch.op;
        L += kron(ch.op.conjugate(), ch.op) - 0.5 * kron(id, ldl) - 0.5 * kron(ldl.transpose(), id);
    }
    return L;
}

Density ground_state(const HilbertConfig& cfg)
{
    Density rho = Density::Zero(cfg.dim(), cfg.dim());
    rho(0, 0) = 1.0;
    return rho;
}

Density exciton_excited_state(const HilbertConfig& cfg)
{
    Density rho = Density::Zero(cfg.dim(), cfg.dim());
    const int idx = cfg.n_max + 1;  // |e, 0>
    rho(idx, idx) = 1.0;
    return rho;
}

double expectation(const Density& rho, const Operator& op)
{
    return (op * rho).trace().real();
}

Evolution evolve(const LindbladModel& model, const Density& rho0, const std::vector<double>& t_grid)
{
    const Eigen::MatrixXcd L = liouvillian(model);
    const JaynesCummingsSpace space(model.hilbert);
    const auto dim = model.hilbert.dim();
    if (rho0.rows() != dim || rho0.cols() != dim)
        throw std::invalid_argument("evolve: initial state has wrong dimension");
    if (std::abs(rho0.trace() - 1.0) > kTraceTolerance)
        throw std::invalid_argument("evolve: initial state must have unit trace");
    for (std::size_t k = 1; k < t_grid.size(); ++k)
        if (!(t_grid[k] > t_grid[k - 1]))
            throw std::invalid_argument("evolve: time grid must be increasing");

    Evolution out;
    out.times = t_grid;
    out.states.reserve(t_grid.size());
    std::map<double, Eigen::MatrixXcd> propagators;
    Eigen::VectorXcd v = vec(rho0);
    double t_prev = t_grid.empty() ? 0.0 : t_grid.front();
    if (t_grid.empty())
        return out;
    if (t_prev > 0.0)
        v = (L * t_prev).exp() * v;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        if (k > 0) {
            const double dt = t_grid[k] - t_prev;
            auto it = propagators.find(dt);
            if (it == propagators.end())
                it = propagators.emplace(dt, (L * dt).exp()).first;
            v = it->second * v;
            t_prev = t_grid[k];
        }
        Density rho = unvec(v, dim);
        if (std::abs(rho.trace() - 1.0) > kTraceTolerance)
            throw ConvergenceError("evolve: trace drifted beyond 1e-8");
        check_cutoff(rho, space);
        out.states.push_back(std::move(rho));
    }
    return out;
}

Density steady_state(const LindbladModel& model)
{
    const Eigen::MatrixXcd L = liouvillian(model);
    const auto dim = model.hilbert.dim();
    Density rho = solve_with_trace(L, Density::Zero(dim, dim), 1.0);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
    if (es.eigenvalues().minCoeff() < -1e-8)
        throw ConvergenceError("steady state is not positive: reduce pump or increase cutoff");
    check_cutoff(rho, JaynesCummingsSpace(model.hilbert));
    return rho;
}

std::vector<double> single_excitation_decay_rates(const LindbladModel& model)
{
    if (model.exciton_pump > 0.0)
        throw std::invalid_argument("single-excitation block is only closed without exciton pumping");
    const Eigen::MatrixXcd L = liouvillian(model);
    const JaynesCummingsSpace space(model.hilbert);
    const int dim = model.hilbert.dim();
    const int states[2] = {space.index(1, 0), space.index(0, 1)};
    std::vector<Eigen::Index> idx;
    for (int j : states)
        for (int i : states)
            idx.push_back(static_cast<Eigen::Index>(j) * dim + i);  // column-major vec index of |i><j|
    Eigen::MatrixXcd block(4, 4);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            block(r, c) = L(idx[r], idx[c]);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(block);
    std::vector<double> rates;
    for (Eigen::Index k = 0; k < 4; ++k)
        rates.push_back(-es.eigenvalues()(k).real());
    std::sort(rates.begin(), rates.end());
    // Populations of each normal mode are the two extreme rates; the middle
    // pair are inter-mode coherences decaying at the mean rate.
    return {rates.front(), rates.back()};
}

G2Curve cw_g2(const LindbladModel& model, Channel channel, const std::vector<double>& tau_grid_ps,
              double background_flux)
{
    if (!(model.exciton_pump > 0.0))
        throw std::invalid_argument("cw_g2 needs a stationary state: exciton_pump must be > 0");
    if (background_flux < 0.0)
        throw std::invalid_argument("background flux must be >= 0");
    for (std::size_t k = 1; k < tau_grid_ps.size(); ++k)
        if (!(tau_grid_ps[k] > tau_grid_ps[k - 1]))
            throw std::invalid_argument("cw_g2: tau grid must be increasing");
    if (!tau_grid_ps.empty() && tau_grid_ps.front() < 0.0)
        throw std::invalid_argument("cw_g2: tau grid must be non-negative");

    const JaynesCummingsSpace space(model.hilbert);
    const Eigen::MatrixXcd L = liouvillian(model);
    const Density rho = steady_state(model);
    const Operator o = lowering_for(channel, space);
    const Operator n_op = o.adjoint() * o;
    const double mean_n = expectation(rho, n_op);
    if (!(mean_n > 0.0))
        throw ConvergenceError("cw_g2: channel carries no stationary intensity");

    const Eigen::RowVectorXcd probe = trace_functional(n_op);
    const Eigen::VectorXcd x0 = vec(o * rho * o.adjoint());
    const double norm = mean_n * mean_n;

    // Long-delay limit: slowest nonzero Liouvillian rate sets the horizon.
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(L, false);
    double slowest = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        const double r = -es.eigenvalues()(k).real();
        if (r > 1e-12)
            slowest = std::min(slowest, r);
    }
    const double horizon = 40.0 / slowest;
    const double g2_inf = (probe * ((L * horizon).exp() * x0))(0).real() / norm;
    if (std::abs(g2_inf - 1.0) > 1e-3)
        throw ConvergenceError("cw_g2: g2 does not relax to 1; reduce pump or increase cutoff");

    G2Curve out;
    out.tau_ps = tau_grid_ps;
    out.signal_flux = emission_rate(channel, model.device) * mean_n;
    out.background_flux = background_flux;
    Eigen::VectorXcd x = x0;
    double t_prev = 0.0;
    std::map<double, Eigen::MatrixXcd> propagators;
    const double fs = out.signal_flux, fb = background_flux, total = fs + fb;
    for (double tau : tau_grid_ps) {
        const double dt = tau - t_prev;
        if (dt > 0.0) {
            auto it = propagators.find(dt);
            if (it == propagators.end())
                it = propagators.emplace(dt, (L * dt).exp()).first;
            x = it->second * x;
        }
        t_prev = tau;
        const double g2_sys = (probe * x)(0).real() / norm;
        out.g2.push_back((fs * fs * g2_sys + 2.0 * fs * fb + fb * fb) / (total * total));
    }
    return out;
}

EnergySpectrum emission_spectrum(const LindbladModel& model, SpectrumSource source, Channel channel,
                                 const std::vector<double>& energy_grid_ueV)
{
    if (energy_grid_ueV.size() < 2)
        throw std::invalid_argument("emission_spectrum: grid needs at least two points");
    for (std::size_t k = 1; k < energy_grid_ueV.size(); ++k)
        if (!(energy_grid_ueV[k] > energy_grid_ueV[k - 1]))
            throw std::invalid_argument("emission_spectrum: grid must be increasing");

    const JaynesCummingsSpace space(model.hilbert);
    const Eigen::MatrixXcd L = liouvillian(model);
    const auto dim = model.hilbert.dim();
    const Operator o = lowering_for(channel, space);

    Density x;
    if (source == SpectrumSource::exciton_excited) {
        if (model.exciton_pump > 0.0)
            throw std::invalid_argument("transient spectrum requires no exciton pump");
        const Density y = solve_with_trace(L, ground_state(model.hilbert) - exciton_excited_state(model.hilbert), 0.0);
        x = o * y;
    } else {
        x = o * steady_state(model);
    }

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(L);
    const Eigen::MatrixXcd& v = es.eigenvectors();
    const Eigen::VectorXcd& d = es.eigenvalues();
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(v);
    const Eigen::VectorXcd u = lu.solve(vec(x));
    const Eigen::RowVectorXcd w = trace_functional(o.adjoint()) * v;
    const double recon = (v * d.asDiagonal() * lu.inverse() - L).norm() / (1.0 + L.norm());

    const double hbar = constants::hbar_ueV_ps;
    const double e_ref = model.device.cavity.value;
    EnergySpectrum out;
    out.energy_ueV = energy_grid_ueV;
    out.intensity.resize(energy_grid_ueV.size());
    double analytic = 0.0;
    if (recon < 1e-8) {
        std::vector<cd> coeff(d.size());
        for (Eigen::Index k = 0; k < d.size(); ++k) {
            coeff[k] = w(k) * u(k);
            if (std::abs(d(k)) > 1e-12)
                analytic += std::numbers::pi * coeff[k].real();
        }
        for (std::size_t j = 0; j < energy_grid_ueV.size(); ++j) {
            const cd iw{0.0, (energy_grid_ueV[j] - e_ref) / hbar};
            cd s = 0.0;
            for (Eigen::Index k = 0; k < d.size(); ++k)
                if (std::abs(d(k)) > 1e-12)
                    s += coeff[k] / (iw - d(k));
            out.intensity[j] = s.real();
        }
    } else {
        // Near an exceptional point: resolvent solves per grid point.
        const Eigen::VectorXcd xv = vec(x);
        const Eigen::RowVectorXcd probe = trace_functional(o.adjoint());
        for (std::size_t j = 0; j < energy_grid_ueV.size(); ++j) {
            const cd iw{0.0, (energy_grid_ueV[j] - e_ref) / hbar};
            Eigen::MatrixXcd m = -L;
            m.diagonal().array() += iw;
            out.intensity[j] = (probe * m.partialPivLu().solve(xv))(0).real();
        }
        analytic = std::numbers::pi * (probe * xv)(0).real();
    }
    analytic *= hbar;  // area over energy in µeV

    double area = 0.0;
    for (std::size_t j = 1; j < energy_grid_ueV.size(); ++j)
        area += 0.5 * (out.intensity[j] + out.intensity[j - 1]) * (energy_grid_ueV[j] - energy_grid_ueV[j - 1]);
    if (!(analytic > 0.0))
        throw ConvergenceError("emission_spectrum: channel emits nothing");
    out.captured_fraction = area / analytic;
    if (out.captured_fraction < 0.999)
        throw ConvergenceError("emission_spectrum: grid captures less than 99.9% of the area; widen it");
    for (double& s : out.intensity)
        s /= area;
    (void)dim;
    return out;
}

ChannelYields channel_yields(const LindbladModel& model)
{
    if (model.exciton_pump > 0.0)
        throw std::invalid_argument("channel_yields requires no exciton pump");
    const JaynesCummingsSpace space(model.hilbert);
    const Eigen::MatrixXcd L = liouvillian(model);
    const Density y = solve_with_trace(L, ground_state(model.hilbert) - exciton_excited_state(model.hilbert), 0.0);
    ChannelYields out;
    out.cavity = emission_rate(Channel::C, model.device) * expectation(y, space.photon_number);
    out.exciton = emission_rate(Channel::X, model.device) * expectation(y, space.exciton_number);
    return out;
}

}  // namespace cqed
