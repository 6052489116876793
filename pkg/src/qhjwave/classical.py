"""Classical characteristic function W0(x) and momentum p(x).

Integrals that touch a turning point use the substitution t = x1 + s**2
(or t = x2 - s**2), which turns the square-root endpoint behaviour of p
into a smooth integrand for Gauss-Legendre quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

from .errors import BracketError, OutsideAllowedRegion
from .potentials import PotentialKind, PotentialModel, TurningPair, find_turning_points

_GL_NODES, _GL_WEIGHTS = leggauss(64)
# relative slack for E - V at the turning points themselves
_TURNING_SLACK = 1e-9


@dataclass(frozen=True)
class ClassicalAction:
    grid: np.ndarray
    W0: np.ndarray
    p: np.ndarray
    energy: float
    turning: TurningPair


def _momentum_sq(model: PotentialModel, E: float, x) -> np.ndarray:
    return 2.0 * model.mass * (E - model(x))


def classical_momentum(model: PotentialModel, E: float, x):
    """Positive branch sqrt(2m(E - V(x)))."""
    q = _momentum_sq(model, E, x)
    scale = 2.0 * model.mass * max(1.0, abs(E))
    if np.any(q < -_TURNING_SLACK * scale):
        raise OutsideAllowedRegion(f"E={E} below V(x) at requested position(s)")
    out = np.sqrt(np.clip(q, 0.0, None))
    return float(out) if np.ndim(out) == 0 else out


def _gl(f, a: float, b: np.ndarray, panels: int = 2) -> np.ndarray:
    """Composite Gauss-Legendre of f over [a, b_i] for every b_i (vectorized)."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    total = np.zeros_like(b)
    edges = np.linspace(0.0, 1.0, panels + 1)
    for lo, hi in zip(edges[:-1], edges[1:]):
        u0 = a + (b - a) * lo
        u1 = a + (b - a) * hi
        half = 0.5 * (u1 - u0)
        nodes = 0.5 * (u0 + u1)[:, None] + half[:, None] * _GL_NODES[None, :]
        total += half * (f(nodes) @ _GL_WEIGHTS)
    return total


def _p_clipped(model, E, t):
    return np.sqrt(np.clip(_momentum_sq(model, E, t), 0.0, None))


def _left_piece(model, E, x1, x):
    # int_{x1}^{x} p dt with t = x1 + s^2
    return _gl(lambda s: 2.0 * s * _p_clipped(model, E, x1 + s * s), 0.0, np.sqrt(x - x1))


def _right_piece(model, E, x2, x):
    # int_{x}^{x2} p dt with t = x2 - s^2
    return _gl(lambda s: 2.0 * s * _p_clipped(model, E, x2 - s * s), 0.0, np.sqrt(x2 - x))


def classical_action(model: PotentialModel, E: float, x, lower: float | None = None,
                     turning: TurningPair | None = None):
    """W0(x) = integral of p from the left turning point (or ``lower``) to x.

    Without ``lower`` the positions must lie in [x1, x2]. With an explicit
    ``lower`` that is not a turning point (constant or free potentials), a
    plain composite Gauss-Legendre rule is used.
    """
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if lower is not None:
        if turning is None and abs(E - float(model(lower))) > 1e-12 * max(1.0, abs(E)):
            classical_momentum(model, E, xa)
            out = _gl(lambda t: _p_clipped(model, E, t), lower, xa, panels=8)
            return float(out[0]) if np.ndim(x) == 0 else out
    if turning is None:
        turning = find_turning_points(model, E)
    x1, x2 = turning.x1, turning.x2
    tol = 1e-12 * max(1.0, turning.width)
    if np.any(xa < x1 - tol) or np.any(xa > x2 + tol):
        raise OutsideAllowedRegion(f"positions must lie in [{x1}, {x2}]")
    xa = np.clip(xa, x1, x2)
    mid = 0.5 * (x1 + x2)
    left_half = float(_left_piece(model, E, x1, np.array([mid]))[0])
    out = np.empty_like(xa)
    lo = xa <= mid
    if lo.any():
        out[lo] = _left_piece(model, E, x1, xa[lo])
    if (~lo).any():
        out[~lo] = left_half + _right_piece(model, E, x2, np.full((~lo).sum(), mid))[0] \
            - _right_piece(model, E, x2, xa[~lo])
    return float(out[0]) if np.ndim(x) == 0 else out


def full_well_action(model: PotentialModel, E: float, turning: TurningPair | None = None) -> float:
    """Integral of p between the two turning points (half the closed-orbit action)."""
    if turning is None:
        turning = find_turning_points(model, E)
    mid = np.array([0.5 * (turning.x1 + turning.x2)])
    return float(_left_piece(model, E, turning.x1, mid)[0]
                 + _right_piece(model, E, turning.x2, mid)[0])


def inverse_momentum_integral(model: PotentialModel, E: float,
                              turning: TurningPair | None = None) -> float:
    """Integral of 1/p between the turning points (half the period times 1/m)."""
    if turning is None:
        turning = find_turning_points(model, E)
    x1, x2 = turning.x1, turning.x2
    mid = 0.5 * (x1 + x2)

    def left(s):
        p = _p_clipped(model, E, x1 + s * s)
        # p ~ c*s near s=0; the limit 2s/p -> 2/c is finite
        return 2.0 * s / np.where(p > 0, p, np.inf)

    def right(s):
        p = _p_clipped(model, E, x2 - s * s)
        return 2.0 * s / np.where(p > 0, p, np.inf)

    return float(_gl(left, 0.0, np.sqrt([mid - x1]), panels=4)[0]
                 + _gl(right, 0.0, np.sqrt([x2 - mid]), panels=4)[0])


def classical_profile(model: PotentialModel, E: float, n_points: int = 2001) -> ClassicalAction:
    turning = find_turning_points(model, E)
    grid = np.linspace(turning.x1, turning.x2, n_points)
    W0 = classical_action(model, E, grid, turning=turning)
    p = classical_momentum(model, E, grid)
    return ClassicalAction(grid, W0, p, E, turning)


def potential_minimum(model: PotentialModel) -> float:
    if model.kind is PotentialKind.HARMONIC:
        return 0.0
    if model.kind is PotentialKind.COULOMB:
        Z, l = model.params["Z"], model.params["l"]
        if l == 0:
            return -np.inf
        r0 = model.hbar**2 * l * (l + 1) / (model.mass * Z)
        return float(model(r0))
    xs = np.linspace(*model.domain, 20001)[1:-1]
    return float(np.min(model(xs)))


def energy_for_action(model: PotentialModel, target: float) -> float:
    """Energy at which the full-well action equals ``target``.

    The action grows monotonically with E for single-well potentials; the
    search is bracketed between the well bottom and the lower of the two
    potential values near the domain ends.
    """
    vmin = potential_minimum(model)
    ends = np.linspace(*model.domain, 2001)[[1, -2]]
    top = float(np.min(model(ends)))
    lo = vmin + 1e-9 * max(1.0, abs(vmin))
    hi = top - 1e-9 * max(1.0, abs(top))

    def g(E):
        try:
            return full_well_action(model, E) - target
        except Exception:
            return -target

    if not (g(lo) < 0 < g(hi)):
        raise BracketError(f"action target {target} not reachable in [{lo}, {hi}]")
    return brentq(g, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=200)
