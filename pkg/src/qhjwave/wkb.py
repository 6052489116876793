"""First-order WKB baseline A sin(W0/hbar + pi/4)/sqrt(p) inside the well."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .classical import classical_action, energy_for_action, inverse_momentum_integral
from .errors import DomainError, UnsupportedPotentialShape
from .potentials import PotentialModel, find_turning_points

VALIDITY_RATIO = 0.1


@dataclass(frozen=True, eq=False)
class WkbSolution:
    grid: np.ndarray = field(repr=False)
    psi_wkb: np.ndarray = field(repr=False)
    validity_mask: np.ndarray = field(repr=False)   # True where hbar |p'| / p^2 < 0.1
    energy: float
    amplitude: float
    ratio: np.ndarray = field(repr=False, default=None)


def _unmasked_amplitude(model: PotentialModel, E: float, tp, n_points: int = 40001) -> float:
    # unit L2 norm of sin(W0/hbar + pi/4)/sqrt(p) over the samples where WKB is valid
    xs = np.linspace(tp.x1, tp.x2, n_points)[1:-1]
    raw = _evaluate(model, E, xs, classical_action(model, E, xs, turning=tp), 1.0)
    y = np.where(raw[1], raw[0] ** 2, 0.0)
    return 1.0 / math.sqrt(trapezoid(y, xs))


def _evaluate(model, E, x, W0, amplitude):
    p = np.sqrt(2.0 * model.mass * (E - model(x)))
    dp = -model.mass * model.derivative(x) / p
    ratio = model.hbar * np.abs(dp) / p**2
    psi = amplitude * np.sin(W0 / model.hbar + math.pi / 4) / np.sqrt(p)
    return psi, ratio < VALIDITY_RATIO, ratio


def wkb_wavefunction(model: PotentialModel, E: float, grid, x_ref: float | None = None,
                     amplitude: float | None = None,
                     normalization: str = "unmasked") -> WkbSolution:
    """Evaluate the WKB form on ``grid``, which must lie strictly between the turning points.

    The phase is measured from the left turning point. The amplitude is
    fixed independently of ``grid``: ``normalization="unmasked"`` gives unit
    L2 norm over the part of the well where the validity ratio is below 0.1,
    ``"classical"`` uses A = sqrt(2 / integral(dx/p)) (sin^2 replaced by its
    mean over the whole well). For potentials without turning points
    (constant V) pass ``x_ref`` as the phase origin; A then defaults to 1.
    """
    x = np.asarray(grid, dtype=float)
    try:
        tp = find_turning_points(model, E)
    except UnsupportedPotentialShape:
        if x_ref is None:
            raise
        tp = None
    if tp is not None:
        if np.any(x <= tp.x1) or np.any(x >= tp.x2):
            raise DomainError(f"WKB grid must lie strictly inside ({tp.x1}, {tp.x2})")
        W0 = classical_action(model, E, x, turning=tp)
        if amplitude is None:
            if normalization == "unmasked":
                amplitude = _unmasked_amplitude(model, E, tp)
            elif normalization == "classical":
                amplitude = math.sqrt(2.0 / inverse_momentum_integral(model, E, tp))
            else:
                raise ValueError(f"unknown normalization {normalization!r}")
    else:
        W0 = classical_action(model, E, x, lower=x_ref)
        amplitude = 1.0 if amplitude is None else amplitude
    psi, mask, ratio = _evaluate(model, E, x, W0, amplitude)
    return WkbSolution(x, psi, mask, float(E), float(amplitude), ratio)


def wkb_quantization(model: PotentialModel, n: int) -> float:
    """Energy with closed-orbit action 2 pi hbar (n_r + 1/2), without Langer correction."""
    nr = model.radial_quantum_number(n)
    if nr < 0:
        raise ValueError(f"state n={n} does not exist for this potential")
    return energy_for_action(model, math.pi * model.hbar * (nr + 0.5))
