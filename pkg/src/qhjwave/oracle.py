"""Independent Schroedinger solver: Numerov recurrence plus shooting.

Radial problems are integrated in t = ln r with u(r) = exp(t/2) w(t), which
turns the centrifugal singularity into a constant (l + 1/2)^2 term and
keeps a uniform Numerov step usable all the way down to r ~ 1e-6.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import make_interp_spline
from scipy.optimize import brentq

from .classical import energy_for_action, potential_minimum
from .errors import BracketError, DomainError
from .potentials import PotentialModel, find_turning_points

# extend the box until the WKB decay exponent reaches this many units of hbar
DECAY_ACTION = 36.0
# step rule: h^2 * max|f| below this
STEP_RULE = 1e-4
_RESCALE_AT = 1e200


@dataclass(frozen=True)
class OracleSolution:
    grid: np.ndarray
    psi: np.ndarray
    energy: float
    node_count: int
    norm_check: float
    model: PotentialModel = field(repr=False)

    @cached_property
    def spline(self):
        return make_interp_spline(self.grid, self.psi, k=5)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any((x < self.grid[0]) | (x > self.grid[-1])):
            raise DomainError("evaluation outside the oracle grid")
        return self.spline(x)


def _numerov(f: np.ndarray, h: float, y0: float, y1: float, reverse: bool = False,
             stop: int | None = None) -> tuple[np.ndarray, list[tuple[int, float]]]:
    """Three-term recurrence for y'' = f y; rescales instead of overflowing."""
    if reverse:
        y, scales = _numerov(f[::-1], h, y0, y1, stop=None if stop is None else len(f) - 1 - stop)
        return y[::-1], [(len(f) - 1 - i, s) for i, s in scales]
    n = len(f) if stop is None else stop + 1
    # summed form z_{i+1} - z_i = d_i, d_i = d_{i-1} + h^2 f_i y_i with z = (1 - h^2 f/12) y;
    # keeps the O(h^2) update out of a 1 - small product
    g = (h * h * f[:n]).tolist()
    y = [0.0] * len(f)
    y[0], y[1] = y0, y1
    z0 = (1.0 - g[0] / 12.0) * y0
    z = (1.0 - g[1] / 12.0) * y1
    d = z - z0
    scales = []
    for i in range(1, n - 1):
        d += g[i] * y[i]
        z += d
        nxt = z / (1.0 - g[i + 1] / 12.0)
        y[i + 1] = nxt
        if abs(nxt) > _RESCALE_AT:
            for j in range(i + 2):
                y[j] /= _RESCALE_AT
            z /= _RESCALE_AT
            d /= _RESCALE_AT
            scales.append((i + 1, _RESCALE_AT))
    return np.array(y), scales


def numerov_integrate(model: PotentialModel, E: float, grid, direction: str = "forward",
                      seed_values: tuple[float, float] = (0.0, 1e-10)) -> np.ndarray:
    """Fill psi on a uniform grid from two seed values at the starting edge.

    ``direction="backward"`` seeds the last two points (``seed_values[0]``
    at the last grid point). No normalization is applied; intermediate
    overflow is handled by rescaling the already computed prefix.
    """
    grid = np.asarray(grid, dtype=float)
    h = grid[1] - grid[0]
    if not np.allclose(np.diff(grid), h, rtol=1e-9, atol=0.0):
        raise ValueError("Numerov needs a uniform grid")
    f = 2.0 * model.mass * (model(grid) - E) / model.hbar**2
    y, _ = _numerov(f, h, *seed_values, reverse=(direction == "backward"))
    return y


# --- grids ---------------------------------------------------------------

@dataclass(frozen=True)
class _Grid:
    x: np.ndarray        # physical positions
    s: np.ndarray        # uniform integration variable (x itself or ln r)
    f: np.ndarray        # Numerov coefficient in s
    h: float
    log: bool


def _decay_edge(model: PotentialModel, E: float, turn: float, direction: int) -> float:
    """Position beyond a turning point where the decay exponent reaches DECAY_ACTION."""
    a, b = model.domain
    limit = b if direction > 0 else a
    step = 0.05 * max(1.0, abs(turn))
    x, acc = turn, 0.0
    while acc < DECAY_ACTION * model.hbar:
        nxt = x + direction * step
        if (direction > 0 and nxt >= limit) or (direction < 0 and nxt <= limit):
            return limit - direction * 1e-9 * abs(limit) if direction > 0 else limit
        mid = 0.5 * (x + nxt)
        acc += step * math.sqrt(max(0.0, 2.0 * model.mass * float(model(mid) - E)))
        x = nxt
    return x


def _make_grid(model: PotentialModel, E_box: float, h: float | None) -> _Grid:
    tp = find_turning_points(model, E_box)
    left = model.domain[0] if model.is_radial else _decay_edge(model, E_box, tp.x1, -1)
    right = _decay_edge(model, E_box, tp.x2, +1)
    if model.is_radial:
        l = model.params["l"]
        s_lo, s_hi = math.log(left), math.log(right)
        probe = np.linspace(s_lo, s_hi, 4001)
        r = np.exp(probe)
        fmax = np.max(np.abs(2 * model.mass * r * r * (model(r) - E_box) / model.hbar**2))
    else:
        s_lo, s_hi = left, right
        probe = np.linspace(s_lo, s_hi, 4001)
        fmax = np.max(np.abs(2 * model.mass * (model(probe) - E_box) / model.hbar**2))
    h_rule = math.sqrt(STEP_RULE / max(fmax, 1e-300))
    h = min(h_rule, 1e-3) if h is None else h
    n = int(math.ceil((s_hi - s_lo) / h)) + 1
    s = np.linspace(s_lo, s_hi, n)
    return _Grid(np.exp(s) if model.is_radial else s, s, np.empty(0), s[1] - s[0], model.is_radial)


def _coefficients(model: PotentialModel, grid: _Grid, E: float) -> np.ndarray:
    if grid.log:
        r = grid.x
        # centrifugal part of V times r^2 is hbar^2 l(l+1)/2m; adding 1/4 gives (l+1/2)^2
        return 2 * model.mass * r * r * (model(r) - E) / model.hbar**2 + 0.25
    return 2 * model.mass * (model(grid.x) - E) / model.hbar**2


def _seeds(model: PotentialModel, grid: _Grid, E: float, end: str) -> tuple[float, float]:
    """WKB-decay seeds at the outer edge (regular power law at a radial origin)."""
    if end == "left" and grid.log:
        l = model.params["l"]
        return 1.0, math.exp((l + 0.5) * grid.h)
    if end == "left":
        xa, xb = grid.x[0], grid.x[1]
    else:
        xa, xb = grid.x[-1], grid.x[-2]
    kappa = math.sqrt(max(0.0, 2 * model.mass * float(model(0.5 * (xa + xb)) - E))) / model.hbar
    ratio = math.exp(kappa * abs(xb - xa))
    if grid.log:
        ratio *= math.exp(-0.5 * (math.log(xb) - math.log(xa)))
    return 1.0, ratio


def _match_index(grid: _Grid, x_match: float) -> int:
    return int(np.clip(np.searchsorted(grid.x, x_match), 2, len(grid.x) - 3))


def _branches(model, grid, E, m):
    f = _coefficients(model, grid, E)
    left, _ = _numerov(f, grid.h, *_seeds(model, grid, E, "left"), stop=m + 1)
    right, _ = _numerov(f, grid.h, *_seeds(model, grid, E, "right"), reverse=True, stop=m)
    return left, right


def _mismatch(model, grid, E, m) -> float:
    left, right = _branches(model, grid, E, m)
    a0, a1 = left[m], left[m + 1]
    b0, b1 = right[m], right[m + 1]
    # sine of the angle between the two (psi_m, psi_{m+1}) vectors: pole-free
    return (a0 * b1 - a1 * b0) / (math.hypot(a0, a1) * math.hypot(b0, b1))


def shoot_eigenvalue(model: PotentialModel, E_bracket: tuple[float, float],
                     h: float | None = None, _grid: _Grid | None = None) -> float:
    """Eigenvalue inside ``E_bracket`` from left/right Numerov shooting."""
    lo, hi = map(float, E_bracket)
    grid = _grid or _make_grid(model, hi, h)
    m = _match_index(grid, find_turning_points(model, 0.5 * (lo + hi)).x2)
    f_lo, f_hi = _mismatch(model, grid, lo, m), _mismatch(model, grid, hi, m)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise BracketError(f"no sign change of the matching function on [{lo}, {hi}]")
    return brentq(lambda E: _mismatch(model, grid, E, m), lo, hi,
                  xtol=1e-15 * max(1.0, abs(lo)), rtol=1e-15, maxiter=200)


def _bracket_for_state(model: PotentialModel, n: int) -> tuple[float, float]:
    """Bracket the state with n_r nodes between WKB energies for n_r and n_r + 1 half-quanta."""
    nr = model.radial_quantum_number(n)
    if nr < 0:
        raise ValueError(f"state n={n} does not exist for this potential")
    vmin = potential_minimum(model)
    lo = vmin + 1e-6 * max(1.0, abs(vmin)) if nr == 0 else energy_for_action(model, math.pi * model.hbar * nr)
    hi = energy_for_action(model, math.pi * model.hbar * (nr + 1))
    return lo, hi


def solve_schrodinger(model: PotentialModel, E: float | None = None, *, n: int | None = None,
                      bracket: tuple[float, float] | None = None,
                      h: float | None = None) -> OracleSolution:
    """Normalized bound state, either at a given energy or shot from a bracket / quantum number."""
    if E is None:
        if bracket is None:
            if n is None:
                raise ValueError("need E, bracket or n")
            bracket = _bracket_for_state(model, n)
        grid = _make_grid(model, bracket[1], h)
        E = shoot_eigenvalue(model, bracket, _grid=grid)
    else:
        grid = _make_grid(model, E, h)
    m = _match_index(grid, find_turning_points(model, E).x2)
    left, right = _branches(model, grid, E, m)
    right = right * (left[m] / right[m])
    w = np.concatenate([left[:m + 1], right[m + 1:]])
    psi = np.exp(0.5 * grid.s) * w if grid.log else w
    weight = psi * psi * (grid.x if grid.log else 1.0)
    psi = psi / math.sqrt(trapezoid(weight, grid.s))
    x1 = find_turning_points(model, E).x1
    if psi[np.searchsorted(grid.x, x1)] < 0:
        psi = -psi
    norm_check = float(trapezoid(psi * psi * (grid.x if grid.log else 1.0), grid.s) - 1.0)
    return OracleSolution(grid.x, psi, float(E), count_nodes(psi), norm_check, model)


def count_nodes(psi: np.ndarray, floor: float = 1e-8) -> int:
    """Sign changes of psi, ignoring the negligible tails."""
    big = psi[np.abs(psi) > floor * np.max(np.abs(psi))]
    return int(np.count_nonzero(np.signbit(big[1:]) != np.signbit(big[:-1])))


def boundary_data(solution: OracleSolution, x: float) -> tuple[float, float]:
    """(psi(x), psi'(x)) from a quintic interpolant of the tabulated state."""
    x = float(x)
    if not solution.grid[0] <= x <= solution.grid[-1]:
        raise DomainError(f"x={x} outside the oracle grid "
                          f"[{solution.grid[0]}, {solution.grid[-1]}]")
    spl = solution.spline
    return float(spl(x)), float(spl(x, 1))
