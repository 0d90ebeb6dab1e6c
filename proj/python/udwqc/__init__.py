"""Python access to the lattice solver, channel engine and design calculators."""

from ._core import (
    BhzParams,
    ConfigError,
    NumericalError,
    PreconditionError,
    UnsupportedError,
    analytic_dispersion,
    bloch_hamiltonian,
    capacity_sweep,
    channel_state,
    coherent_information,
    continuum_map,
    edge_velocity,
    esr_frequency,
    hgte_params,
    max_link_distance,
    moire_velocity,
    pi_correlator,
    q_loc,
    ribbon_bands,
    run,
    switching_time,
    thermal_polarization,
    torus_eigenvalues,
    von_neumann_entropy,
)

__all__ = [
    "BhzParams",
    "ConfigError",
    "NumericalError",
    "PreconditionError",
    "UnsupportedError",
    "analytic_dispersion",
    "bloch_hamiltonian",
    "capacity_sweep",
    "channel_state",
    "coherent_information",
    "continuum_map",
    "edge_velocity",
    "esr_frequency",
    "hgte_params",
    "max_link_distance",
    "moire_velocity",
    "pi_correlator",
    "q_loc",
    "ribbon_bands",
    "run",
    "switching_time",
    "thermal_polarization",
    "torus_eigenvalues",
    "von_neumann_entropy",
]
