#pragma once

#include "cqed/coupled_oscillator.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace cqed {

using Operator = Eigen::MatrixXcd;
using Density = Eigen::MatrixXcd;

/// Two-level emitter times a Fock space truncated at n_max photons.
struct HilbertConfig {
    int n_max = 2;
    int dim() const { return 2 * (n_max + 1); }
};

/// Jaynes-Cummings model with Markovian loss and incoherent feeding. Rates
/// are in 1/ps; energies in `device` are in µeV.
struct LindbladModel {
    SystemParams device;
    double exciton_pump = 0.0;     // P_x, sigma+ jumps
    double cavity_feed = 0.0;      // P_c, a+ sigma- jumps (exciton handed to the cavity)
    double pure_dephasing = 0.0;   // optional sigma+ sigma- jumps; off by default
    HilbertConfig hilbert;

    void validate() const;
};

enum class Channel { C, X };

const char* to_string(Channel c);

/// Matrix representations in the |q, n> basis, index q * (n_max + 1) + n with
/// q = 0 ground, q = 1 excited.
struct JaynesCummingsSpace {
    explicit JaynesCummingsSpace(HilbertConfig cfg);

    HilbertConfig config;
    Operator identity;
    Operator sigma_minus;
    Operator a;
    Operator exciton_number;  // sigma+ sigma-
    Operator photon_number;   // a+ a

    int index(int q, int n) const { return q * (config.n_max + 1) + n; }
    /// Projector onto |n_max> of the cavity.
    Operator top_fock_projector() const;
};

struct JumpChannel {
    std::string name;
    Operator op;  // already scaled by sqrt(rate)
    std::optional<Channel> emits;
};

/// Hamiltonian in µeV, in the frame rotating at the cavity energy.
Operator hamiltonian(const LindbladModel& model, const JaynesCummingsSpace& space);

std::vector<JumpChannel> jump_channels(const LindbladModel& model, const JaynesCummingsSpace& space);

/// Column-stacked superoperator in 1/ps.
Eigen::MatrixXcd liouvillian(const LindbladModel& model);

Density ground_state(const HilbertConfig& cfg);
Density exciton_excited_state(const HilbertConfig& cfg);

double expectation(const Density& rho, const Operator& op);

struct Evolution {
    std::vector<double> times;
    std::vector<Density> states;
};

/// Exact propagation by matrix exponentials between grid points. Throws
/// ConvergenceError when the top Fock level holds more than 1e-6 population.
Evolution evolve(const LindbladModel& model, const Density& rho0, const std::vector<double>& t_grid);

/// Unique stationary state. Throws ConvergenceError when it cannot be found
/// or is not cutoff-converged.
Density steady_state(const LindbladModel& model);

/// Non-oscillating decay rates (1/ps) of the single-excitation density block,
/// ascending. Without pumping they equal 2|Im E_k|/hbar of the normal modes.
std::vector<double> single_excitation_decay_rates(const LindbladModel& model);

struct G2Curve {
    std::vector<double> tau_ps;
    std::vector<double> g2;
    double signal_flux = 0.0;      // photons/ps from the emitter-cavity system
    double background_flux = 0.0;  // independent Poisson photons/ps
};

/// Stationary second-order correlation of one output channel via the
/// quantum regression theorem. `background_flux` adds an independent
/// Poissonian stream into the same channel.
G2Curve cw_g2(const LindbladModel& model, Channel channel, const std::vector<double>& tau_grid_ps,
              double background_flux = 0.0);

enum class SpectrumSource { exciton_excited, steady_state };

struct EnergySpectrum {
    std::vector<double> energy_ueV;
    std::vector<double> intensity;  // unit area over energy_ueV
    double captured_fraction = 0.0;
};

/// Fourier transform of <O+(t+tau) O(t)> integrated over t, O the channel's
/// lowering operator. Throws ConvergenceError when the grid captures less
/// than 99.9% of the analytic area.
EnergySpectrum emission_spectrum(const LindbladModel& model, SpectrumSource source, Channel channel,
                                 const std::vector<double>& energy_grid_ueV);

struct ChannelYields {
    double cavity = 0.0;   // expected C photons
    double exciton = 0.0;  // expected X photons
};

/// Photons emitted into each channel starting from an excited exciton and an
/// empty cavity, integrated until the system is back in its ground state.
/// Requires no exciton pump.
ChannelYields channel_yields(const LindbladModel& model);

}  // namespace cqed
