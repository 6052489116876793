"""Potential models, turning points and analytic reference states.

Every model carries its own constants ``hbar`` and ``mass`` because the
radial Coulomb problem folds the centrifugal term hbar^2 l(l+1)/(2 m r^2)
into the potential.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Mapping

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import eval_genlaguerre, gammaln

from .errors import (
    DomainError,
    NotAvailable,
    RootFindError,
    UnsupportedPotentialShape,
)

SCAN_PANELS = 10_000
ROOT_BRACKET = 1e-12


class PotentialKind(str, Enum):
    HARMONIC = "harmonic"
    COULOMB = "coulomb"
    CUSTOM = "custom"


@dataclass(frozen=True)
class TurningPair:
    x1: float
    x2: float

    def __post_init__(self):
        if not self.x1 < self.x2:
            raise ValueError(f"turning points out of order: {self.x1} >= {self.x2}")

    @property
    def width(self) -> float:
        return self.x2 - self.x1


@dataclass(frozen=True, eq=False)
class PotentialModel:
    """An evaluable one-dimensional (or radial) potential.

    ``func``/``dfunc`` are only used by custom models; tabulated custom
    models keep their spline in ``func`` as well.
    """

    kind: PotentialKind
    params: Mapping[str, float]
    domain: tuple[float, float]
    hbar: float = 1.0
    mass: float = 1.0
    func: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    dfunc: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    label: str = ""

    def __post_init__(self):
        a, b = self.domain
        if not a < b:
            raise ValueError(f"empty domain {self.domain}")
        if self.kind is PotentialKind.COULOMB and a <= 0:
            raise ValueError("radial Coulomb domain must start at r > 0")
        if self.kind is PotentialKind.CUSTOM and self.func is None:
            raise ValueError("custom potential needs a callable or a table")
        if self.hbar <= 0 or self.mass <= 0:
            raise ValueError("hbar and mass must be positive")

    # hot path: no domain check
    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind is PotentialKind.HARMONIC:
            return 0.5 * self.params["k"] * x * x
        if self.kind is PotentialKind.COULOMB:
            Z, l = self.params["Z"], self.params["l"]
            return -Z / x + self.hbar**2 * l * (l + 1) / (2.0 * self.mass * x * x)
        return np.asarray(self.func(x), dtype=float)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind is PotentialKind.HARMONIC:
            return self.params["k"] * x
        if self.kind is PotentialKind.COULOMB:
            Z, l = self.params["Z"], self.params["l"]
            return Z / x**2 - self.hbar**2 * l * (l + 1) / (self.mass * x**3)
        if self.dfunc is not None:
            return np.asarray(self.dfunc(x), dtype=float)
        h = 1e-5 * np.maximum(1.0, np.abs(x))
        return (self.func(x + h) - self.func(x - h)) / (2 * h)

    def evaluate(self, x):
        """V(x) with a domain check (open interior)."""
        xa = np.asarray(x, dtype=float)
        a, b = self.domain
        if np.any(~((xa > a) & (xa < b))):
            raise DomainError(f"x outside domain interior ({a}, {b})")
        return self(xa)

    @property
    def has_analytic(self) -> bool:
        return self.kind in (PotentialKind.HARMONIC, PotentialKind.COULOMB)

    @property
    def is_radial(self) -> bool:
        return self.kind is PotentialKind.COULOMB

    @property
    def omega(self) -> float:
        return math.sqrt(self.params["k"] / self.mass)

    def radial_quantum_number(self, n: int) -> int:
        """Number of nodes of state ``n`` (n - l - 1 for the radial problem)."""
        if self.kind is PotentialKind.COULOMB:
            return n - int(self.params["l"]) - 1
        return n

    def to_dict(self) -> dict[str, Any]:
        out = {"kind": self.kind.value, "params": dict(self.params),
               "domain": list(self.domain), "hbar": self.hbar, "mass": self.mass}
        if self.label:
            out["label"] = self.label
        return out


# --- constructors ---------------------------------------------------------

def harmonic(k: float = 1.0, *, hbar: float = 1.0, mass: float = 1.0,
             domain: tuple[float, float] | None = None) -> PotentialModel:
    if domain is None:
        length = (hbar**2 / (mass * k)) ** 0.25
        domain = (-40.0 * length, 40.0 * length)
    return PotentialModel(PotentialKind.HARMONIC, {"k": float(k)}, tuple(domain), hbar, mass)


def coulomb_radial(Z: float = 1.0, l: int = 1, *, hbar: float = 1.0, mass: float = 1.0,
                   domain: tuple[float, float] = (1e-6, 400.0)) -> PotentialModel:
    if l < 0 or int(l) != l:
        raise ValueError("l must be a non-negative integer")
    return PotentialModel(PotentialKind.COULOMB, {"Z": float(Z), "l": int(l)},
                          tuple(domain), hbar, mass)


def custom(func: Callable, domain: tuple[float, float], *, dfunc: Callable | None = None,
           hbar: float = 1.0, mass: float = 1.0, params: Mapping[str, float] | None = None,
           label: str = "") -> PotentialModel:
    return PotentialModel(PotentialKind.CUSTOM, dict(params or {}), tuple(domain), hbar, mass,
                          func=func, dfunc=dfunc, label=label)


def constant(V0: float, domain: tuple[float, float] = (-50.0, 50.0), **kw) -> PotentialModel:
    return custom(lambda x: np.full_like(np.asarray(x, dtype=float), V0),
                  domain, dfunc=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                  params={"V0": V0}, label="constant", **kw)


def linear(slope: float = 1.0, domain: tuple[float, float] = (-50.0, 50.0), **kw) -> PotentialModel:
    return custom(lambda x: slope * np.asarray(x, dtype=float), domain,
                  dfunc=lambda x: np.full_like(np.asarray(x, dtype=float), slope),
                  params={"slope": slope}, label="linear", **kw)


def from_table(xs, vs, *, hbar: float = 1.0, mass: float = 1.0, label: str = "table") -> PotentialModel:
    xs = np.asarray(xs, dtype=float)
    vs = np.asarray(vs, dtype=float)
    order = np.argsort(xs)
    spline = CubicSpline(xs[order], vs[order])
    dspline = spline.derivative()
    return custom(spline, (float(xs.min()), float(xs.max())), dfunc=dspline,
                  hbar=hbar, mass=mass, label=label)


def read_table(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read an (x, V) CSV with a header row."""
    xs, vs = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                xs.append(float(row[0]))
                vs.append(float(row[1]))
            except ValueError:
                continue  # header
    if len(xs) < 4:
        raise ValueError(f"{path}: need at least 4 tabulated points")
    return np.array(xs), np.array(vs)


def load_potential(spec: Mapping[str, Any], *, hbar: float = 1.0, mass: float = 1.0,
                   base_dir: str | Path | None = None) -> PotentialModel:
    """Build a model from config keys ``kind``, ``params``, ``domain`` (and ``table``)."""
    kind = PotentialKind(str(spec.get("kind", "harmonic")).lower())
    params = dict(spec.get("params") or {})
    domain = spec.get("domain")
    domain = tuple(float(v) for v in domain) if domain else None
    if kind is PotentialKind.HARMONIC:
        return harmonic(params.get("k", 1.0), hbar=hbar, mass=mass, domain=domain)
    if kind is PotentialKind.COULOMB:
        kw = {"domain": domain} if domain else {}
        return coulomb_radial(params.get("Z", 1.0), int(params.get("l", 1)),
                              hbar=hbar, mass=mass, **kw)
    table = spec.get("table")
    if not table:
        raise ValueError("custom potential requires a 'table' CSV path")
    path = Path(table)
    if base_dir is not None and not path.is_absolute():
        path = Path(base_dir) / path
    xs, vs = read_table(path)
    model = from_table(xs, vs, hbar=hbar, mass=mass, label=str(table))
    if domain:
        model = custom(model.func, domain, dfunc=model.dfunc, hbar=hbar, mass=mass,
                       label=model.label)
    return model


# --- operations ------------------------------------------------------------

def evaluate_potential(model: PotentialModel, x):
    return model.evaluate(x)


def _bisect(f, a: float, b: float, fa: float, width: float = ROOT_BRACKET) -> float:
    for _ in range(200):
        if b - a <= width:
            return 0.5 * (a + b)
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    raise RootFindError(f"bisection did not shrink [{a}, {b}] below {width}")


def find_turning_points(model: PotentialModel, E: float) -> TurningPair:
    """Both roots of E - V(x) = 0 by a uniform sign-change scan and bisection."""
    a, b = model.domain
    xs = np.linspace(a, b, SCAN_PANELS + 1)[1:-1]
    g = E - model(xs)
    sign = g > 0
    changes = np.nonzero(sign[1:] != sign[:-1])[0]
    if len(changes) != 2:
        raise UnsupportedPotentialShape(
            f"E={E}: found {len(changes)} sign changes of E - V on {model.domain}, need 2")

    def f(x):
        return float(E - model(x))

    roots = []
    for i in changes:
        lo, hi = float(xs[i]), float(xs[i + 1])
        root = _bisect(f, lo, hi, f(lo))
        roots.append(_newton_polish(model, E, root, lo, hi))
    return TurningPair(*roots)


def _newton_polish(model: PotentialModel, E: float, x: float, lo: float, hi: float) -> float:
    # two Newton steps take the 1e-12 bracket to machine precision
    for _ in range(2):
        d = float(model.derivative(x))
        if d == 0.0:
            break
        step = float(model(x) - E) / d
        if not lo <= x - step <= hi:
            break
        x -= step
    return x


def analytic_energy(model: PotentialModel, n: int) -> float:
    if model.kind is PotentialKind.HARMONIC:
        return (n + 0.5) * model.hbar * model.omega
    if model.kind is PotentialKind.COULOMB:
        l = model.params["l"]
        if n < l + 1:
            raise ValueError(f"principal quantum number n={n} needs n > l={l}")
        return -model.mass * model.params["Z"] ** 2 / (2.0 * model.hbar**2 * n * n)
    raise NotAvailable(f"{model.kind.value} potential has no analytic spectrum")


def _hermite_function(n: int, xi: np.ndarray) -> np.ndarray:
    # three-term recurrence on normalized functions; exact parity under xi -> -xi
    prev = np.zeros_like(xi)
    cur = np.pi**-0.25 * np.exp(-0.5 * xi * xi)
    for j in range(n):
        prev, cur = cur, math.sqrt(2.0 / (j + 1)) * xi * cur - math.sqrt(j / (j + 1)) * prev
    return cur


def analytic_eigenfunction(model: PotentialModel, n: int, x):
    """Unit-normalized exact state, signed so that psi > 0 next to the left turning point."""
    x = np.asarray(x, dtype=float)
    if model.kind is PotentialKind.HARMONIC:
        alpha = model.mass * model.omega / model.hbar
        xi = math.sqrt(alpha) * x
        # H_n ~ (2 xi)^n, so the left tail carries the sign (-1)^n
        return (-1) ** n * alpha**0.25 * _hermite_function(n, xi)
    if model.kind is PotentialKind.COULOMB:
        Z, l = model.params["Z"], int(model.params["l"])
        if n < l + 1:
            raise ValueError(f"principal quantum number n={n} needs n > l={l}")
        a = model.hbar**2 / (model.mass * Z)
        rho = 2.0 * x / (n * a)
        k = n - l - 1
        log_norm = 0.5 * (math.log(2.0 / (n * a)) + gammaln(k + 1) - math.log(2.0 * n)
                          - gammaln(n + l + 1))
        return math.exp(log_norm) * rho ** (l + 1) * np.exp(-0.5 * rho) * eval_genlaguerre(k, 2 * l + 1, rho)
    raise NotAvailable(f"{model.kind.value} potential has no analytic eigenfunctions")


def analytic_derivative(model: PotentialModel, n: int, x):
    """d psi/dx of :func:`analytic_eigenfunction`, in closed form."""
    x = np.asarray(x, dtype=float)
    if model.kind is PotentialKind.HARMONIC:
        alpha = model.mass * model.omega / model.hbar
        xi = math.sqrt(alpha) * x
        up = _hermite_function(n + 1, xi)
        down = _hermite_function(n - 1, xi) if n > 0 else 0.0
        return (-1) ** n * alpha**0.75 * (math.sqrt(n / 2.0) * down - math.sqrt((n + 1) / 2.0) * up)
    if model.kind is PotentialKind.COULOMB:
        Z, l = model.params["Z"], int(model.params["l"])
        a = model.hbar**2 / (model.mass * Z)
        rho = 2.0 * x / (n * a)
        k = n - l - 1
        log_norm = 0.5 * (math.log(2.0 / (n * a)) + gammaln(k + 1) - math.log(2.0 * n)
                          - gammaln(n + l + 1))
        L = eval_genlaguerre(k, 2 * l + 1, rho)
        dL = -eval_genlaguerre(k - 1, 2 * l + 2, rho) if k > 0 else 0.0
        d_rho = rho**l * np.exp(-0.5 * rho) * ((l + 1) * L - 0.5 * rho * L + rho * dL)
        return math.exp(log_norm) * d_rho * 2.0 / (n * a)
    raise NotAvailable(f"{model.kind.value} potential has no analytic eigenfunctions")
