#pragma once

#include "cqed/spectrum.hpp"
#include "cqed/units.hpp"

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace cqed {

/// Exciton-cavity parameter set. Linewidths are FWHM in µeV.
struct SystemParams {
    Energy exciton;
    Energy cavity;
    Energy gamma_x;
    Energy gamma_c;
    Energy coupling;

    Energy detuning() const { return Energy{exciton.value - cavity.value}; }

    /// Throws std::invalid_argument on non-positive linewidths, negative
    /// coupling or non-finite values.
    void validate() const;

    SystemParams with_detuning(Energy delta) const;
};

/// Diagonal damping of the non-Hermitian coupled-mode matrix: mode j sits at
/// E_j - i * kModeDamping * gamma_j. With 1/2 the eigenvalues reproduce the
/// closed form exactly and each bare mode has FWHM gamma_j.
inline constexpr double kModeDamping = 0.5;

enum class BranchCharacter { exciton_like, cavity_like, mixed };

const char* to_string(BranchCharacter c);

struct EigenPair {
    ComplexEnergy upper;
    ComplexEnergy lower;
    BranchCharacter upper_character = BranchCharacter::mixed;
    BranchCharacter lower_character = BranchCharacter::mixed;
};

struct FiguresOfMerit {
    double purcell{};
    double efficiency{};
    Energy rabi_splitting{};  // zero when not strongly coupled
    bool strongly_coupled = false;
};

struct AnticrossingPoint {
    Energy detuning;
    ComplexEnergy upper;  // branch that starts as the upper one on the first grid point
    ComplexEnergy lower;
    BranchCharacter upper_character = BranchCharacter::mixed;
    BranchCharacter lower_character = BranchCharacter::mixed;
};

using AnticrossingCurve = std::vector<AnticrossingPoint>;

using ModeMatrix = Eigen::Matrix2cd;

/// [[E_x - i γ_x/2, g], [g, E_c - i γ_c/2]] in the (exciton, cavity) basis.
ModeMatrix coupled_mode_matrix(const SystemParams& p);

/// Closed-form normal-mode energies, principal complex square root.
EigenPair eigen_energies(const SystemParams& p);

/// Right eigenvectors (columns, unit norm) matching eigen_energies order
/// (upper first).
Eigen::Matrix2cd normal_mode_vectors(const SystemParams& p);

/// Exciton weight |v_x|^2 / |v|^2 of each branch, upper first.
std::array<double, 2> exciton_fraction(const SystemParams& p);

bool is_strongly_coupled(const SystemParams& p);

/// Splitting at zero detuning regardless of the stored energies. Throws
/// std::domain_error when the system is not strongly coupled.
Energy vacuum_rabi_splitting(const SystemParams& p);

/// FWHM of (upper, lower).
std::pair<Energy, Energy> branch_linewidths(const SystemParams& p);

/// Lifetime of the exciton-like branch. Throws std::domain_error when the
/// branches cannot be told apart (zero detuning in strong coupling).
Duration exciton_branch_lifetime(const SystemParams& p);

/// Bare exciton lifetime that reproduces `measured` for the exciton-like
/// branch at the given detuning. Bisection over gamma_x in (0, gamma_c).
/// Throws std::domain_error when no solution lies in the interval.
Duration infer_bare_lifetime(Duration measured, Energy detuning, Energy coupling,
                             Energy gamma_c);

FiguresOfMerit figures_of_merit(Energy coupling, Energy gamma_c, Energy gamma_x);

/// Coupling from a resonance splitting and the two bare linewidths.
Energy coupling_from_splitting(Energy splitting, Energy gamma_c, Energy gamma_x);

/// Eigen-energies along a detuning grid (cavity fixed, exciton moved), with
/// branches followed by maximum eigenvector overlap.
AnticrossingCurve detuning_sweep(const SystemParams& p, const std::vector<double>& detuning_grid);

enum class InitialExcitation { exciton_excited, cavity_fed };

struct ModeLine {
    ComplexEnergy energy;
    double weight{};
};

/// Emission lines of the linear model: one per normal mode, weighted by the
/// squared projection of the initial vector onto that mode; weights sum to
/// one. Coalesced branches collapse to a single line.
std::vector<ModeLine> model_lines(const SystemParams& p, InitialExcitation initial);

/// Lines converted to wavelength space with the local dE/dλ.
std::vector<LorentzianLine> to_wavelength_lines(const std::vector<ModeLine>& lines);

/// Pixel-averaged two-Lorentzian spectrum with unit total area over the
/// whole real line.
Spectrum model_spectrum(const SystemParams& p, const std::vector<double>& wavelength_grid_nm,
                        InitialExcitation initial);

}  // namespace cqed
