"""Cavity-QED forward model and photon-statistics analysis (C++ core)."""

from ._core import (
    ConfigError,
    ConvergenceError,
    StatisticsError,
    coupling_from_splitting,
    cw_g2,
    eigen_energies,
    energy_to_wavelength,
    exciton_branch_lifetime,
    figures_of_merit,
    fit_synthetic_series,
    infer_bare_lifetime,
    lifetime_to_linewidth,
    linewidth_to_lifetime,
    pulsed_g2,
    simulate,
    vacuum_rabi_splitting,
    wavelength_to_energy,
)

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "StatisticsError",
    "coupling_from_splitting",
    "cw_g2",
    "eigen_energies",
    "energy_to_wavelength",
    "exciton_branch_lifetime",
    "figures_of_merit",
    "fit_synthetic_series",
    "infer_bare_lifetime",
    "lifetime_to_linewidth",
    "linewidth_to_lifetime",
    "pulsed_g2",
    "simulate",
    "vacuum_rabi_splitting",
    "wavelength_to_energy",
]
