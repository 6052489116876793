"""Bound states of one-dimensional potentials from the quantum Hamilton-Jacobi equation."""

from .assembly import (
    MatchReport,
    WavefunctionTable,
    assemble,
    compare,
    find_eigenvalues,
    node_positions,
    quantization_residual,
    solve_state,
)
from .potentials import (
    PotentialKind,
    PotentialModel,
    TurningPair,
    analytic_eigenfunction,
    analytic_energy,
    coulomb_radial,
    evaluate_potential,
    find_turning_points,
    harmonic,
)
from .qhje import (
    GridSpec,
    PhaseInit,
    build_phase_init,
    family_scan,
    integrate_forbidden,
    integrate_phase_ode,
)

__version__ = "0.1.0"

__all__ = [
    "GridSpec", "MatchReport", "PhaseInit", "PotentialKind", "PotentialModel", "TurningPair",
    "WavefunctionTable", "analytic_eigenfunction", "analytic_energy", "assemble",
    "build_phase_init", "compare", "coulomb_radial", "evaluate_potential", "family_scan",
    "find_eigenvalues", "find_turning_points", "harmonic", "integrate_forbidden",
    "integrate_phase_ode", "node_positions", "quantization_residual", "solve_state",
]
