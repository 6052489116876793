"""Three-region wavefunction assembly, comparison metrics and eigenvalue search.

Region II uses psi = B sin(X/hbar + phi)/sqrt(X'); the forbidden regions use
psi = B_{I,III} exp(-Y/hbar) with Y = 0 at the turning point, so B_I and
B_III are simply the region II values at x1 and x2.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import make_interp_spline
from scipy.optimize import brentq

from .errors import DomainError, IncomparableGrids, JoinError, QHJError
from .oracle import OracleSolution, boundary_data, solve_schrodinger
from .potentials import (
    PotentialModel,
    TurningPair,
    analytic_eigenfunction,
    analytic_energy,
    find_turning_points,
)
from .qhje import (
    ActionSolution,
    ForbiddenSolution,
    GridSpec,
    Region,
    build_phase_init,
    default_xp0,
    integrate_forbidden,
    integrate_phase_ode,
)

JOIN_TOL = 1e-8


@dataclass(frozen=True)
class MatchReport:
    """How well region II joins the decaying region III solution at x2.

    ``value_mismatch`` is the sine of the angle between the vectors
    (psi, psi'/kappa) of the two solutions (kappa the Airy momentum scale at
    x2). It is bounded, pole-free and changes sign at every eigenvalue,
    which makes it the root-finding residual. ``logderiv_mismatch`` is the
    plain difference of logarithmic derivatives.
    """

    energy: float
    value_mismatch: float
    logderiv_mismatch: float
    joined: bool
    X_turning: tuple[float, float] = (math.nan, math.nan)
    Xp_turning: tuple[float, float] = (math.nan, math.nan)
    crossings: int = -1
    error: str | None = None

    @property
    def usable(self) -> bool:
        return self.error is None and math.isfinite(self.value_mismatch)

    def to_dict(self) -> dict:
        return {
            "energy": self.energy,
            "value_mismatch": self.value_mismatch,
            "logderiv_mismatch": self.logderiv_mismatch,
            "joined": self.joined,
            "X_x1": self.X_turning[0], "X_x2": self.X_turning[1],
            "Xp_x1": self.Xp_turning[0], "Xp_x2": self.Xp_turning[1],
            "error": self.error,
        }


def _airy_scale(model: PotentialModel, x: float) -> float:
    slope = abs(float(model.derivative(x)))
    return max((2.0 * model.mass * slope / model.hbar**2) ** (1.0 / 3.0), 1e-3)


def match_at(action: ActionSolution, fsol: ForbiddenSolution, tol: float = JOIN_TOL) -> MatchReport:
    """Compare the region II representation with a decaying tail at the shared turning point."""
    x = fsol.turning_point
    hbar = action.model.hbar
    a0, a1 = float(action.psi(x)), float(action.dpsi(x))
    b0, b1 = 1.0, -fsol.Q_turn / hbar
    k = _airy_scale(action.model, x)
    sine = (a0 * b1 - a1 * b0) / k / (math.hypot(a0, a1 / k) * math.hypot(b0, b1 / k))
    if fsol.region is Region.I:
        sine = -sine
    ld = a1 / a0 - b1 if a0 != 0.0 else math.inf
    X1, Xp1, _ = action.state(action.span[0])
    X2, Xp2, _ = action.state(action.span[1])
    joined = abs(ld) < tol and abs(sine) < tol
    return MatchReport(float(action.energy), float(sine), float(ld), bool(joined),
                       (float(X1), float(X2)), (float(Xp1), float(Xp2)), phase_crossings(action))


# --- wavefunction table ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WavefunctionTable:
    grid: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)
    energy: float
    phi: float
    nodes: tuple[float, ...]
    segment_constants: tuple[float, float, float]   # (B_I, B_II, B_III) after normalization
    norm: float
    turning: TurningPair
    report: MatchReport | None = None
    action: ActionSolution | None = field(default=None, repr=False)
    forbidden: tuple[ForbiddenSolution, ForbiddenSolution] | None = field(default=None, repr=False)

    @property
    def span(self) -> tuple[float, float]:
        return float(self.grid[0]), float(self.grid[-1])

    def __call__(self, x):
        """Evaluate psi anywhere in the table span from the underlying dense solutions."""
        x = np.asarray(x, dtype=float)
        lo, hi = self.span
        if np.any((x < lo) | (x > hi)):
            raise DomainError(f"positions outside [{lo}, {hi}]")
        if self.action is None:
            return make_interp_spline(self.grid, self.psi, k=5)(x)
        BI, BII, BIII = self.segment_constants
        fI, fIII = self.forbidden
        x1, x2 = self.turning.x1, self.turning.x2
        flat = np.atleast_1d(x)
        out = np.empty_like(flat)
        i, k = flat < x1, flat > x2
        j = ~(i | k)
        if i.any():
            out[i] = BI * fI.psi(flat[i])
        if k.any():
            out[k] = BIII * fIII.psi(flat[k])
        if j.any():
            X, Xp, _ = self.action.state(flat[j])
            out[j] = BII * np.sin(self.action.angle(X)) / np.sqrt(Xp)
        return out.reshape(x.shape)

    def envelope_parts(self, x=None):
        """(x, 1/sqrt(X'), sin(X/hbar + phi), product) across region II."""
        x = self.action.grid if x is None else np.asarray(x, dtype=float)
        X, Xp, _ = self.action.state(x)
        env, sine = 1.0 / np.sqrt(Xp), np.sin(self.action.angle(X))
        return x, env, sine, self.segment_constants[1] * env * sine


def phase_crossings(action: ActionSolution) -> int:
    X1 = float(action.state(action.span[0])[0])
    X2 = float(action.state(action.span[1])[0])
    return int(math.floor(action.angle(X2) / math.pi) - math.floor(action.angle(X1) / math.pi))


def node_positions(action: ActionSolution, phi: float | None = None) -> list[float]:
    """Positions where X/hbar + phi passes a multiple of pi, refined on the dense output.

    X is strictly increasing (X' > 0), so each crossing is bracketed by the
    span ends and the root search cannot fail.
    """
    phi = action.init.phi if phi is None else phi
    a, b = action.span
    hbar = action.init.hbar
    Xa = float(action.state(a)[0]) / hbar + phi
    Xb = float(action.state(b)[0]) / hbar + phi
    out = []
    for k in range(math.floor(Xa / math.pi) + 1, math.floor(Xb / math.pi) + 1):
        target = k * math.pi
        if target >= Xb:
            break

        def g(x, target=target):
            return float(action.state(x)[0]) / hbar + phi - target
        out.append(brentq(g, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200))
    return out


def assemble(action: ActionSolution, forb_I: ForbiddenSolution, forb_III: ForbiddenSolution,
             phi: float | None = None, join_tol: float = JOIN_TOL,
             check_join: bool = True) -> WavefunctionTable:
    """Glue the three regions, normalize, and fix the sign so psi(x1) > 0.

    Raises JoinError when the derivative mismatch at either turning point
    exceeds ``join_tol`` (only meaningful at an eigen-energy); pass
    ``check_join=False`` to assemble anyway.
    """
    if phi is not None and abs(phi - action.init.phi) > 1e-15:
        raise ValueError(f"phi={phi} differs from the phase used to integrate ({action.init.phi})")
    phi = action.init.phi
    x1, x2 = action.span
    if abs(forb_I.turning_point - x1) > 1e-9 * max(1.0, abs(x1)) or \
            abs(forb_III.turning_point - x2) > 1e-9 * max(1.0, abs(x2)):
        raise ValueError("forbidden solutions do not abut the allowed region")
    for f in (forb_I, forb_III):
        if abs(f.energy - action.energy) > 1e-14 * max(1.0, abs(action.energy)):
            raise ValueError("solutions were computed at different energies")

    report = match_at(action, forb_III, join_tol)
    left = match_at(action, forb_I, join_tol)
    if check_join and not (abs(report.logderiv_mismatch) < join_tol
                           and abs(left.logderiv_mismatch) < join_tol):
        raise JoinError(f"turning-point log-derivative mismatch {left.logderiv_mismatch:.3g} (x1), "
                        f"{report.logderiv_mismatch:.3g} (x2) exceeds {join_tol:g}", report)

    B = action.init.B
    BI, BIII = float(action.psi(x1)), float(action.psi(x2))
    total = BI**2 * forb_I.norm + B**2 * action.norm + BIII**2 * forb_III.norm
    c = math.copysign(1.0 / math.sqrt(total), BI)
    consts = (c * BI, c * B, c * BIII)

    grid = np.concatenate([forb_I.grid, action.grid[1:-1], forb_III.grid])
    X, Xp = action.X[1:-1], action.Xp[1:-1]
    psi = np.concatenate([consts[0] * forb_I.psi(forb_I.grid),
                          consts[1] * np.sin(action.angle(X)) / np.sqrt(Xp),
                          consts[2] * forb_III.psi(forb_III.grid)])
    return WavefunctionTable(grid, psi, float(action.energy), float(phi),
                             tuple(node_positions(action, phi)), consts, 1.0,
                             TurningPair(x1, x2), report, action, (forb_I, forb_III))


# --- quantization ----------------------------------------------------------------

def _left_boundary(fI: ForbiddenSolution) -> tuple[float, float]:
    return 1.0, -fI.Q_turn / fI.model.hbar


def quantization_residual(model: PotentialModel, E: float, phi: float = math.pi / 4,
                          X0: float = 0.0, Xp0: float | None = None,
                          grid: GridSpec = GridSpec(), tol: float = JOIN_TOL) -> MatchReport:
    """Join quality at x2 for the solution that decays into region I.

    No Schroedinger oracle is involved: the region I Riccati solution
    supplies psi(x1), psi'(x1). Solver failures are returned as a report
    with ``error`` set and NaN mismatches.
    """
    try:
        tp = find_turning_points(model, E)
        fI = integrate_forbidden(model, E, Region.I, grid=grid, turning=tp, with_norm=False)
        fIII = integrate_forbidden(model, E, Region.III, grid=grid, turning=tp, with_norm=False)
        xp0 = default_xp0(model, tp.x1) if Xp0 is None else Xp0
        init = build_phase_init(*_left_boundary(fI), X0, phi, xp0, tp.x1, model.hbar)
        action = integrate_phase_ode(model, E, init, grid, span=(tp.x1, tp.x2))
    except QHJError as exc:
        return MatchReport(float(E), math.nan, math.nan, False, error=f"{type(exc).__name__}: {exc}")
    return match_at(action, fIII, tol)


def _scan(model, energies, phi, X0, Xp0, grid, workers):
    def one(E):
        return quantization_residual(model, E, phi, X0, Xp0, grid)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, energies))
    return [one(E) for E in energies]


def residual_scan(model: PotentialModel, energies, phi: float = math.pi / 4, X0: float = 0.0,
                  Xp0: float | None = None, grid: GridSpec = GridSpec(),
                  workers: int = 1) -> list[MatchReport]:
    """quantization_residual over a list of energies, in the given order."""
    return _scan(model, [float(E) for E in energies], phi, X0, Xp0, grid, workers)


def find_eigenvalues(model: PotentialModel, E_range: tuple[float, float], phi: float = math.pi / 4,
                     X0: float = 0.0, Xp0: float | None = None, n_mesh: int = 64,
                     tol: float = 1e-9, grid: GridSpec = GridSpec(), workers: int = 1,
                     max_depth: int = 6, return_scan: bool = False):
    """Eigenvalues strictly inside ``E_range`` from sign changes of the join residual.

    A coarse mesh (loosened tolerances) brackets sign changes; panels whose
    phase-crossing count jumps by two or more are subdivided so that close
    eigenvalues are not lost; each bracket is then refined at full tolerance.
    Roots within ~1e-7 of either end of the range are dropped, since their
    membership in the range is decided by roundoff. With ``return_scan``
    the coarse-mesh reports are returned as well: ``(roots, reports)``.
    """
    lo, hi = map(float, E_range)
    if not lo < hi:
        raise ValueError("E_range must be increasing")
    try:
        from .classical import potential_minimum
        vmin = potential_minimum(model)
    except QHJError:
        vmin = -math.inf
    start = max(lo, vmin + 1e-3 * (hi - lo)) if math.isfinite(vmin) else lo
    coarse = grid.loosened()
    mesh = list(np.linspace(start, hi, n_mesh))
    reports = _scan(model, mesh, phi, X0, Xp0, coarse, workers)

    def refine_panels(es, rs, depth):
        out_e, out_r = [es[0]], [rs[0]]
        for i in range(len(es) - 1):
            a, b, ra, rb = es[i], es[i + 1], rs[i], rs[i + 1]
            if depth < max_depth and ra.usable and rb.usable and abs(rb.crossings - ra.crossings) >= 2:
                mids = list(np.linspace(a, b, 5)[1:-1])
                mr = _scan(model, mids, phi, X0, Xp0, coarse, workers)
                se, sr = refine_panels([a] + mids + [b], [ra] + mr + [rb], depth + 1)
                out_e += se[1:]
                out_r += sr[1:]
            else:
                out_e.append(b)
                out_r.append(rb)
        return out_e, out_r

    mesh, reports = refine_panels(mesh, reports, 0)

    def f(E):
        r = quantization_residual(model, E, phi, X0, Xp0, grid)
        if not r.usable:
            raise QHJError(r.error)
        return r.value_mismatch

    roots = []
    for a, b, ra, rb in zip(mesh[:-1], mesh[1:], reports[:-1], reports[1:]):
        if not (ra.usable and rb.usable):
            continue
        if (ra.value_mismatch > 0) == (rb.value_mismatch > 0):
            continue
        # the sine residual also flips sign where psi_II and the tail are antiparallel;
        # that is still an eigenvalue, so every bracketed sign change counts
        fa, fb = f(a), f(b)
        if (fa > 0) == (fb > 0):
            # coarse and fine residuals disagree on the sign; tighten the bracket
            es = np.linspace(a, b, 9)
            vals = [f(e) for e in es]
            pairs = [(es[i], es[i + 1]) for i in range(8) if (vals[i] > 0) != (vals[i + 1] > 0)]
            if not pairs:
                continue
            a, b = pairs[0]
        root = brentq(f, a, b, xtol=tol * 0.1, rtol=4 * np.finfo(float).eps, maxiter=200)
        edge = 1e-7 * max(1.0, abs(lo), abs(hi))
        if root - lo > edge and hi - root > edge:
            roots.append(float(root))
    roots.sort()
    return (roots, reports) if return_scan else roots


# --- comparison -------------------------------------------------------------------

@dataclass(frozen=True)
class CompareMetrics:
    max_abs_error: float
    L2_error: float
    node_position_errors: tuple[float, ...]
    node_count_match: bool
    window: tuple[float, float]

    def to_dict(self) -> dict:
        return {"max_abs_error": self.max_abs_error, "L2_error": self.L2_error,
                "node_position_errors": list(self.node_position_errors),
                "node_count_match": self.node_count_match, "window": list(self.window)}


def _sign_change_roots(fn, xs) -> list[float]:
    v = fn(xs)
    scale = np.max(np.abs(v))
    out = []
    for i in np.nonzero(np.signbit(v[1:]) != np.signbit(v[:-1]))[0]:
        if max(abs(v[i]), abs(v[i + 1])) < 1e-8 * scale:
            continue  # numerical noise in a tail
        out.append(brentq(lambda t: float(fn(np.array([t]))[0]), xs[i], xs[i + 1], xtol=1e-14))
    return out


def _as_callable(ref):
    if isinstance(ref, (WavefunctionTable, OracleSolution)):
        return ref, (float(ref.grid[0]), float(ref.grid[-1]))
    if callable(ref):
        return (lambda x: np.asarray(ref(np.asarray(x, dtype=float)), dtype=float)), None
    raise TypeError("reference must be a WavefunctionTable, OracleSolution or callable")


def compare(wf: WavefunctionTable, reference, window: tuple[float, float] | None = None,
            n_points: int = 20001) -> CompareMetrics:
    """Error metrics of ``wf`` against a tabulated or analytic reference.

    Both are evaluated on a common uniform grid (tabulated references through
    their quintic interpolants) over the overlap of the spans, optionally
    restricted to ``window``. The reference is sign-aligned to ``wf`` first.
    """
    ref_fn, ref_span = _as_callable(reference)
    a, b = wf.span
    if ref_span is not None:
        lo, hi = max(a, ref_span[0]), min(b, ref_span[1])
        union = max(b, ref_span[1]) - min(a, ref_span[0])
        if hi <= lo or (hi - lo) < 0.9 * union:
            raise IncomparableGrids(f"overlap [{lo}, {hi}] covers less than 90% of the joint span")
        a, b = lo, hi
    if window is not None:
        a, b = max(a, window[0]), min(b, window[1])
        if not a < b:
            raise IncomparableGrids("comparison window does not intersect the grids")
    xs = np.linspace(a, b, n_points)
    u, v = wf(xs), ref_fn(xs)
    if float(np.dot(u, v)) < 0:
        v = -v
        ref_sign = -1.0
    else:
        ref_sign = 1.0
    d = u - v
    l2 = float(np.sqrt(np.sum(0.5 * (d[1:] ** 2 + d[:-1] ** 2) * np.diff(xs))))
    mine = [n for n in wf.nodes if a <= n <= b] if wf.action is not None else \
        _sign_change_roots(wf, xs)
    theirs = _sign_change_roots(lambda x: ref_sign * ref_fn(x), xs)
    k = min(len(mine), len(theirs))
    errs = tuple(float(abs(p - q)) for p, q in zip(mine[:k], theirs[:k]))
    return CompareMetrics(float(np.max(np.abs(d))), l2, errs, len(mine) == len(theirs), (a, b))


# --- one-call pipeline --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StateRun:
    table: WavefunctionTable
    action: ActionSolution = field(repr=False)
    forbidden_I: ForbiddenSolution = field(repr=False)
    forbidden_III: ForbiddenSolution = field(repr=False)
    energy: float
    boundary: tuple[float, float]
    boundary_source: str
    turning: TurningPair


def state_energy(model: PotentialModel, n: int) -> float:
    """Analytic eigenvalue when available, otherwise the oracle's shooting result."""
    try:
        return analytic_energy(model, n)
    except QHJError:
        return solve_schrodinger(model, n=n).energy


def solve_state(model: PotentialModel, n: int | None = None, E: float | None = None,
                phi: float = math.pi / 4, X0: float = 0.0, Xp0: float | None = None,
                boundary: str = "riccati", grid: GridSpec = GridSpec(),
                join_tol: float = JOIN_TOL, check_join: bool = True) -> StateRun:
    """Full pipeline at one energy: forbidden tails, phase ODE, assembly.

    ``boundary`` selects where psi(x1), psi'(x1) come from: "riccati" (the
    region I solution, no oracle), "oracle" (Numerov solution at E) or
    "analytic" (closed-form eigenfunction).
    """
    if E is None:
        if n is None:
            raise ValueError("need n or E")
        E = state_energy(model, n)
    tp = find_turning_points(model, E)
    fI = integrate_forbidden(model, E, Region.I, grid=grid, turning=tp)
    fIII = integrate_forbidden(model, E, Region.III, grid=grid, turning=tp)
    if boundary == "riccati":
        psi1, dpsi1 = _left_boundary(fI)
    elif boundary == "oracle":
        psi1, dpsi1 = boundary_data(solve_schrodinger(model, E), tp.x1)
    elif boundary == "analytic":
        if n is None:
            raise ValueError("analytic boundary data needs the quantum number n")
        from .potentials import analytic_derivative
        psi1 = float(analytic_eigenfunction(model, n, tp.x1))
        dpsi1 = float(analytic_derivative(model, n, tp.x1))
    else:
        raise ValueError(f"unknown boundary source {boundary!r}")
    xp0 = default_xp0(model, tp.x1) if Xp0 is None else Xp0
    init = build_phase_init(psi1, dpsi1, X0, phi, xp0, tp.x1, model.hbar)
    action = integrate_phase_ode(model, E, init, grid, span=(tp.x1, tp.x2))
    table = assemble(action, fI, fIII, join_tol=join_tol, check_join=check_join)
    return StateRun(table, action, fI, fIII, float(E), (psi1, dpsi1), boundary, tp)
