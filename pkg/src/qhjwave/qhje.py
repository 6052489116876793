"""Quantum Hamilton-Jacobi solver.

Allowed region: the real phase X obeys the third-order equation

    X'^2 - (3/4) hbar^2 X''^2 / X'^2 + (1/2) hbar^2 X''' / X' = 2m (E - V)

and the wavefunction there is B sin(X/hbar + phi) / sqrt(X').  Forbidden
regions: the imaginary phase Y obeys -Y'^2 + hbar Y'' = 2m (E - V), which we
integrate as a Riccati equation for Q = Y', always from deep inside the
barrier toward the turning point (the only stable direction).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad, solve_ivp

from .errors import (
    AsymptoticsError,
    BranchCollapse,
    BranchError,
    DegenerateInit,
    RiccatiBlowup,
    StiffnessError,
)
from .potentials import PotentialModel, TurningPair, find_turning_points

_GL_NODES, _GL_WEIGHTS = leggauss(48)


@dataclass(frozen=True)
class GridSpec:
    """Sampling and tolerance settings shared by the ODE solvers."""

    n_allowed: int = 2001
    n_forbidden: int = 801
    rtol: float = 1e-11
    atol: float = 1e-13
    # decay exponent (in units of hbar) between a turning point and the default far point
    decay_action: float = 40.0
    # maximum tolerated ratio hbar |p'| / p^2 at a WKB-seeded far point
    asymptotic_ratio: float = 1e-3

    def loosened(self, factor: float = 1e3) -> "GridSpec":
        return GridSpec(self.n_allowed, self.n_forbidden, min(1e-6, self.rtol * factor),
                        min(1e-8, self.atol * factor), self.decay_action, self.asymptotic_ratio)


# --- allowed region -----------------------------------------------------------

@dataclass(frozen=True)
class PhaseInit:
    x_start: float
    X0: float
    phi: float
    Xp0: float
    Xpp0: float
    B: float
    hbar: float = 1.0

    @property
    def angle(self) -> float:
        return self.X0 / self.hbar + self.phi

    def residuals(self, psi1: float, dpsi1: float) -> tuple[float, float]:
        """Mismatch of the representation (and its derivative) against the boundary data."""
        th = self.angle
        value = self.B * math.sin(th) / math.sqrt(self.Xp0)
        slope = self.B / math.sqrt(self.Xp0) * (
            self.Xp0 / self.hbar * math.cos(th) - 0.5 * self.Xpp0 / self.Xp0 * math.sin(th))
        return value - psi1, slope - dpsi1


def build_phase_init(psi1: float, dpsi1: float, X0: float = 0.0, phi: float = math.pi / 4,
                     Xp0: float = 1.0, x_start: float = 0.0, hbar: float = 1.0) -> PhaseInit:
    """Initial data (X, X', X'') at x1 reproducing psi(x1), psi'(x1).

    X0 and Xp0 are free gauge choices; B and X'' follow from
    B sin(X0/hbar + phi)/sqrt(Xp0) = psi(x1) and the derivative of the representation.
    """
    if Xp0 <= 0:
        raise BranchError(f"Xp0={Xp0}: only the X' > 0 branch is supported")
    if psi1 == 0.0 and dpsi1 == 0.0:
        raise ValueError("boundary data (0, 0) is the trivial solution")
    s, c = math.sin(X0 / hbar + phi), math.cos(X0 / hbar + phi)
    if abs(s) < 1e-14:
        raise DegenerateInit(f"sin(X0/hbar + phi) = 0 for X0={X0}, phi={phi}")
    if psi1 == 0.0:
        raise DegenerateInit("psi(x1) = 0 requires sin(X0/hbar + phi) = 0; shift the turning point "
                             "or start from a point where psi does not vanish")
    B = psi1 * math.sqrt(Xp0) / s
    Xpp0 = 2.0 * Xp0 * (Xp0 / hbar * c / s - dpsi1 / psi1)
    return PhaseInit(float(x_start), float(X0), float(phi), float(Xp0), float(Xpp0), float(B),
                     float(hbar))


def default_xp0(model: PotentialModel, x1: float) -> float:
    """Turning-point momentum scale (2 m hbar |V'(x1)|)^(1/3), floored at 0.1.

    At a linear turning point this is the only momentum the local (Airy)
    problem defines; any positive value is admissible by gauge freedom.
    """
    slope = abs(float(model.derivative(x1)))
    return max((2.0 * model.mass * model.hbar * slope) ** (1.0 / 3.0), 0.1)


@dataclass(frozen=True, eq=False)
class ActionSolution:
    """Real phase X and its derivatives sampled on the allowed region."""

    model: PotentialModel = field(repr=False)
    energy: float
    init: PhaseInit
    grid: np.ndarray = field(repr=False)
    X: np.ndarray = field(repr=False)
    Xp: np.ndarray = field(repr=False)
    Xpp: np.ndarray = field(repr=False)
    Xppp: np.ndarray = field(repr=False)
    Y: np.ndarray = field(repr=False)
    norm: float  # integral of sin^2(X/hbar + phi)/X' over the region
    dense: object = field(repr=False)
    nfev: int = 0

    @property
    def family_param(self) -> tuple[float, float, float]:
        return (self.init.X0, self.init.phi, self.init.Xp0)

    @property
    def span(self) -> tuple[float, float]:
        return float(self.grid[0]), float(self.grid[-1])

    def state(self, x):
        """(X, X', X'') at arbitrary positions inside the span."""
        y = self.dense(np.asarray(x, dtype=float))
        return y[0], y[1], y[2]

    def angle(self, X):
        """Phase angle X/hbar + phi of the sine factor."""
        return X / self.init.hbar + self.init.phi

    def psi(self, x):
        """Unnormalized B sin(X/hbar + phi)/sqrt(X')."""
        X, Xp, _ = self.state(x)
        return self.init.B * np.sin(self.angle(X)) / np.sqrt(Xp)

    def dpsi(self, x):
        X, Xp, Xpp = self.state(x)
        th = self.angle(X)
        return self.init.B / np.sqrt(Xp) * (Xp / self.init.hbar * np.cos(th) - 0.5 * Xpp / Xp * np.sin(th))

    def peak_count(self) -> int:
        """Strict local maxima of X' in the interior (sign changes + to - of X'')."""
        xs = np.linspace(*self.span, max(20001, 4 * len(self.grid)))
        _, _, Xpp = self.state(xs)
        return int(np.count_nonzero((Xpp[:-1] > 0) & (Xpp[1:] <= 0)))


def _third_derivative(model, E, x, Xp, Xpp):
    hb2 = model.hbar**2
    return (2.0 * Xp / hb2) * (2.0 * model.mass * (E - model(x)) - Xp * Xp) + 1.5 * Xpp * Xpp / Xp


def _phase_rhs(model, E, phi):
    hbar = model.hbar

    def rhs(x, y):
        X, Xp, Xpp = y[0], y[1], y[2]
        s = math.sin(X / hbar + phi)
        return [Xp, Xpp, _third_derivative(model, E, x, Xp, Xpp),
                0.5 * hbar * Xpp / Xp, s * s / Xp]
    return rhs


def integrate_phase_ode(model: PotentialModel, E: float, init: PhaseInit,
                        grid: GridSpec = GridSpec(),
                        span: tuple[float, float] | None = None) -> ActionSolution:
    """Integrate the phase equation from x1 to x2 (or over ``span``)."""
    if init.Xp0 <= 0:
        raise BranchError("Xp0 must be positive")
    if span is None:
        tp = find_turning_points(model, E)
        span = (tp.x1, tp.x2)
    a, b = map(float, span)

    def collapse(x, y):
        return y[1] - 1e-12 * init.Xp0
    collapse.terminal = True
    collapse.direction = -1

    y0 = [init.X0, init.Xp0, init.Xpp0, 0.0, 0.0]
    # X' can dip to ~1e-5 between peaks; a purely relative control on X', X''
    # keeps ln X' (and so the amplitude) accurate there
    tiny = grid.atol * 1e-8
    atol = [grid.atol, tiny * init.Xp0, tiny * max(abs(init.Xpp0), init.Xp0), grid.atol, grid.atol]
    sol = solve_ivp(_phase_rhs(model, E, init.phi), (a, b), y0, method="DOP853",
                    rtol=grid.rtol, atol=atol, dense_output=True, events=collapse)
    if sol.status == 1:
        where = float(sol.t_events[0][0])
        raise BranchCollapse(f"X' reached zero at x={where}", where)
    if sol.status != 0:
        raise StiffnessError(f"phase integration failed: {sol.message}")
    xs = np.linspace(a, b, grid.n_allowed)
    X, Xp, Xpp, Y, _ = sol.sol(xs)
    Xppp = _third_derivative(model, E, xs, Xp, Xpp)
    return ActionSolution(model, float(E), init, xs, X, Xp, Xpp, Xppp, Y,
                          float(sol.y[4, -1]), sol.sol, int(sol.nfev))


def phase_residual(sol: ActionSolution, x=None, independent: bool = False) -> np.ndarray:
    """Residual of the phase equation at interior points.

    By default X''' is taken from the ODE right-hand side, which checks that
    the stored X', X'' and X''' are mutually consistent. With
    ``independent=True`` X''' is a 5-point finite difference of the dense
    X'' (step scaled to the local length 1/(X'/hbar + |X''|/X')) and the
    residual is returned relative to the largest of the four terms.
    """
    m = sol.model
    hb2 = m.hbar**2
    a, b = sol.span
    if x is None:
        x = sol.grid[1:-1]
    x = np.asarray(x, dtype=float)
    _, Xp, Xpp = sol.state(x)
    if independent:
        h = 5e-3 / (Xp / m.hbar + np.abs(Xpp) / Xp + 1.0 / (b - a))
        x = np.clip(x, a + 2 * h, b - 2 * h)
        _, Xp, Xpp = sol.state(x)
        f = [sol.state(x + k * h)[2] for k in (-2, -1, 1, 2)]
        Xppp = (f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * h)
    else:
        Xppp = _third_derivative(m, sol.energy, x, Xp, Xpp)
    terms = (Xp**2, -0.75 * hb2 * Xpp**2 / Xp**2, 0.5 * hb2 * Xppp / Xp,
             -2 * m.mass * (sol.energy - m(x)))
    res = terms[0] + terms[1] + terms[2] + terms[3]
    if independent:
        res = res / np.max(np.abs(terms), axis=0)
    return res


def amplitude_drift(sol: ActionSolution) -> float:
    """max |Y - hbar ln sqrt(X') - const| with Y integrated independently via X'Y' = hbar X''/2."""
    g = sol.Y - sol.model.hbar * 0.5 * np.log(sol.Xp)
    return float(np.max(np.abs(g - g[0])))


# --- forbidden regions ---------------------------------------------------------

class Region(str, Enum):
    I = "I"
    III = "III"


@dataclass(frozen=True, eq=False)
class ForbiddenSolution:
    region: Region
    model: PotentialModel = field(repr=False)
    energy: float
    turning_point: float
    far_point: float
    grid: np.ndarray = field(repr=False)   # ascending
    Y: np.ndarray = field(repr=False)      # Y = 0 at the turning point
    Yp: np.ndarray = field(repr=False)     # Q = Y'
    norm: float                            # integral of exp(-2Y/hbar) over the region
    dense: object = field(repr=False)
    y_turn: float = field(repr=False, default=0.0)

    @property
    def span(self) -> tuple[float, float]:
        return float(self.grid[0]), float(self.grid[-1])

    def Q(self, x):
        return self.dense(np.asarray(x, dtype=float))[0]

    def Yv(self, x):
        return self.dense(np.asarray(x, dtype=float))[1] - self.y_turn

    def psi(self, x):
        """exp(-Y/hbar), equal to 1 at the turning point."""
        return np.exp(-self.Yv(x) / self.model.hbar)

    def dpsi(self, x):
        return -self.Q(x) / self.model.hbar * self.psi(x)

    @property
    def Q_turn(self) -> float:
        return float(self.Q(self.turning_point))


def _abs_momentum(model, E, x):
    return np.sqrt(np.clip(2.0 * model.mass * (model(x) - E), 0.0, None))


def _barrier_action(model, E, turn, far) -> float:
    # integral of |p| from the turning point, with t = turn + sign * s^2
    sgn = 1.0 if far > turn else -1.0
    smax = math.sqrt(abs(far - turn))
    total = 0.0
    edges = np.linspace(0.0, smax, 9)
    for lo, hi in zip(edges[:-1], edges[1:]):
        s = 0.5 * (lo + hi) + 0.5 * (hi - lo) * _GL_NODES
        total += 0.5 * (hi - lo) * float(
            (2 * s * _abs_momentum(model, E, turn + sgn * s * s)) @ _GL_WEIGHTS)
    return total


def _default_far_point(model, E, turn, direction, decay_action) -> float:
    a, b = model.domain
    limit = (b - 1e-9 * max(1.0, abs(b))) if direction > 0 else (a + 1e-9 * max(1.0, abs(a)))
    target = decay_action * model.hbar
    if _barrier_action(model, E, turn, limit) <= target:
        return limit
    lo, hi = turn, limit
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if _barrier_action(model, E, turn, mid) < target:
            lo = mid
        else:
            hi = mid
    return hi


def _frobenius_logderiv(model, E, r, terms: int = 14) -> float:
    """u'/u of the regular radial solution r^(l+1) (1 + a1 r + ...) near the origin."""
    l = int(model.params["l"])
    kappa = 2 * model.mass * model.params["Z"] / model.hbar**2
    eps = 2 * model.mass * E / model.hbar**2
    a = [1.0, -kappa / (2 * l + 2)]
    for k in range(2, terms):
        a.append((-kappa * a[k - 1] - eps * a[k - 2]) / (k * (k + 2 * l + 1)))
    num = sum(k * a[k] * r ** (k - 1) for k in range(1, terms))
    den = sum(a[k] * r**k for k in range(terms))
    return (l + 1) / r + num / den


def wkb_seed(model: PotentialModel, E: float, x: float, region: Region) -> float:
    """Second-order WKB value of Q on the decaying branch."""
    p = float(_abs_momentum(model, E, x))
    dp = model.mass * float(model.derivative(x)) / p
    corr = model.hbar * dp / (2 * p)
    return p + corr if region is Region.III else -p + corr


def asymptotic_ratio(model: PotentialModel, E: float, x: float) -> float:
    p = float(_abs_momentum(model, E, x))
    if p == 0.0:
        return math.inf
    return model.hbar * model.mass * abs(float(model.derivative(x))) / p**3


def integrate_forbidden(model: PotentialModel, E: float, region: Region | str,
                        far_point: float | None = None, grid: GridSpec = GridSpec(),
                        turning: TurningPair | None = None,
                        turning_point: float | None = None,
                        with_norm: bool = True) -> ForbiddenSolution:
    """Riccati integration hbar Q' = Q^2 + 2m(E - V) from the far point to the turning point.

    ``turning_point`` overrides the turning-point search (for potentials with
    a single turning point such as a linear barrier). ``with_norm=False``
    skips the weight quadrature (``norm`` is then NaN), which energy scans
    do not need.
    """
    region = Region(region)
    if turning_point is None:
        turning = turning or find_turning_points(model, E)
        turning_point = turning.x2 if region is Region.III else turning.x1
    xt = float(turning_point)
    direction = 1 if region is Region.III else -1
    radial_origin = model.is_radial and region is Region.I

    if far_point is None:
        if radial_origin:
            far_point = max(model.domain[0] * (1 + 1e-9), 1e-3 * xt)
        else:
            far_point = _default_far_point(model, E, xt, direction, grid.decay_action)
    far = float(far_point)
    if (far - xt) * direction <= 0:
        raise AsymptoticsError(f"far point {far} is not beyond the turning point {xt}")

    if radial_origin:
        Q0 = -model.hbar * _frobenius_logderiv(model, E, far)
    else:
        ratio = asymptotic_ratio(model, E, far)
        if ratio >= grid.asymptotic_ratio:
            damping = math.exp(-2.0 * _barrier_action(model, E, xt, far) / model.hbar)
            if ratio * ratio * damping >= 1e-14:
                raise AsymptoticsError(
                    f"far point {far}: hbar|p'|/p^2 = {ratio:.3g} and the barrier only damps "
                    f"seed errors by {damping:.3g}")
        Q0 = wkb_seed(model, E, far, region)

    hbar, two_m = model.hbar, 2.0 * model.mass
    qscale = 1e6 * max(1.0, abs(Q0))

    def rhs(x, y):
        Q = y[0]
        return [(Q * Q + two_m * (E - float(model(x)))) / hbar, Q]

    def blowup(x, y):
        return qscale - abs(y[0])
    blowup.terminal = True

    sol = solve_ivp(rhs, (far, xt), [Q0, 0.0], method="DOP853", rtol=grid.rtol,
                    atol=grid.atol, dense_output=True, events=blowup)
    if sol.status == 1:
        where = float(sol.t_events[0][0])
        raise RiccatiBlowup(f"Q diverged at x={where} (wrong branch or direction)", where)
    if sol.status != 0:
        raise StiffnessError(f"Riccati integration failed: {sol.message}")
    y_turn = float(sol.y[1, -1])
    lo, hi = min(far, xt), max(far, xt)
    xs = np.linspace(lo, hi, grid.n_forbidden)
    Q, Yrel = sol.sol(xs)
    Y = Yrel - y_turn

    def weight(x):
        return math.exp(-2.0 * (float(sol.sol(x)[1]) - y_turn) / hbar)

    # split near the turning point where almost all the weight sits
    pts = [xt + direction * d for d in (0.5, 2.0, 8.0) if lo < xt + direction * d < hi]
    norm = math.nan
    if with_norm:
        norm, _ = quad(weight, lo, hi, points=pts or None, limit=400, epsabs=0.0, epsrel=1e-13)
    return ForbiddenSolution(region, model, float(E), xt, far, xs, Y, Q, float(norm),
                             sol.sol, y_turn)


def riccati_residual(fsol: ForbiddenSolution, x=None, independent: bool = False) -> np.ndarray:
    """-Y'^2 + hbar Y'' - 2m(E - V) at interior points.

    Default: Y'' from the Riccati right-hand side. ``independent=True``
    differentiates the dense Q numerically (local step ~ hbar/|Q|) and
    returns the residual relative to the largest term.
    """
    m = fsol.model
    a, b = fsol.span
    if x is None:
        x = fsol.grid[1:-1]
    x = np.asarray(x, dtype=float)
    Q = fsol.Q(x)
    if independent:
        h = 5e-3 * m.hbar / (np.abs(Q) + m.hbar / (b - a))
        x = np.clip(x, a + 2 * h, b - 2 * h)
        Q = fsol.Q(x)
        q = [fsol.Q(x + k * h) for k in (-2, -1, 1, 2)]
        Ypp = (q[0] - 8 * q[1] + 8 * q[2] - q[3]) / (12 * h)
    else:
        Ypp = (Q * Q + 2 * m.mass * (fsol.energy - m(x))) / m.hbar
    terms = (-Q * Q, m.hbar * Ypp, -2 * m.mass * (fsol.energy - m(x)))
    res = terms[0] + terms[1] + terms[2]
    if independent:
        res = res / np.max(np.abs(terms), axis=0)
    return res


# --- gauge family --------------------------------------------------------------

def family_scan(model: PotentialModel, E: float, boundary: tuple[float, float], X0_values,
                phi: float = math.pi / 4, Xp0: float | None = None,
                grid: GridSpec = GridSpec(), turning: TurningPair | None = None,
                errors: str = "collect") -> list:
    """One phase solution per X0; failing members are returned as their exception
    (``errors="collect"``) or raised (``errors="raise"``)."""
    turning = turning or find_turning_points(model, E)
    xp0 = default_xp0(model, turning.x1) if Xp0 is None else Xp0
    out = []
    for X0 in X0_values:
        try:
            init = build_phase_init(boundary[0], boundary[1], X0, phi, xp0, turning.x1, model.hbar)
            out.append(integrate_phase_ode(model, E, init, grid, span=(turning.x1, turning.x2)))
        except (DegenerateInit, BranchCollapse, StiffnessError) as exc:
            if errors == "raise":
                raise
            out.append(exc)
    return out
