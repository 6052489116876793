"""Run configuration: a flat dataclass loaded from YAML/JSON and overridden by flags."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError
from .potentials import PotentialModel, load_potential
from .qhje import GridSpec

MODES = ("solve", "scan-energy", "family-check", "compare", "emit-figures")
BOUNDARY_SOURCES = ("oracle", "riccati", "analytic")
BUILTIN_POTENTIALS = {"harmonic": "harmonic", "coulomb": "coulomb", "hydrogen": "coulomb"}


@dataclass
class RunConfig:
    mode: str = "solve"
    potential: str = "harmonic"          # harmonic, coulomb, or a path to a CSV table
    params: dict[str, float] = field(default_factory=dict)
    domain: list[float] | None = None
    hbar: float = 1.0
    mass: float = 1.0
    energy: float | None = None
    n: int | None = None
    l: int | None = None
    phi: float = math.pi / 4
    x0: list[float] = field(default_factory=lambda: [0.0])
    xp0: list[float] | None = None       # None: turning-point momentum-scale heuristic
    boundary: str = "oracle"
    e_range: list[float] | None = None
    n_mesh: int = 64
    tol: float = 1e-8                    # join / family tolerance
    error_tol: float = 1e-7              # max-abs error bound used by --check
    rtol: float = 1e-11
    atol: float = 1e-13
    n_allowed: int = 2001
    n_forbidden: int = 801
    workers: int = 1
    out: str = "out"
    check: bool = False

    # --- derived objects ---
    def grid_spec(self) -> GridSpec:
        return GridSpec(n_allowed=self.n_allowed, n_forbidden=self.n_forbidden,
                        rtol=self.rtol, atol=self.atol)

    def potential_spec(self) -> dict[str, Any]:
        kind = BUILTIN_POTENTIALS.get(self.potential.lower())
        params = dict(self.params)
        if kind == "coulomb" and self.l is not None:
            params["l"] = self.l
        if kind is None:
            path = Path(self.potential)
            if path.suffix.lower() in (".yaml", ".yml", ".json"):
                spec = yaml.safe_load(path.read_text()) or {}
                spec = dict(spec)
                spec.setdefault("params", {}).update(params)
                if self.domain:
                    spec["domain"] = self.domain
                return spec
            return {"kind": "custom", "table": str(path), "domain": self.domain, "params": params}
        spec = {"kind": kind, "params": params}
        if self.domain:
            spec["domain"] = list(self.domain)
        return spec

    def model(self) -> PotentialModel:
        base = None
        if BUILTIN_POTENTIALS.get(self.potential.lower()) is None:
            base = Path(self.potential).parent
        return load_potential(self.potential_spec(), hbar=self.hbar, mass=self.mass, base_dir=base)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    # --- validation ---
    def problems(self) -> list[str]:
        out = []
        if self.mode not in MODES:
            out.append(f"mode must be one of {', '.join(MODES)} (got {self.mode!r})")
        for name in ("hbar", "mass", "tol", "error_tol", "rtol", "atol"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not v > 0 or not math.isfinite(v):
                out.append(f"{name} must be a positive number (got {v!r})")
        for name in ("n_mesh", "n_allowed", "n_forbidden", "workers"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < (3 if name != "workers" else 1):
                out.append(f"{name} must be an integer >= {3 if name != 'workers' else 1} (got {v!r})")
        if self.boundary not in BOUNDARY_SOURCES:
            out.append(f"boundary must be one of {', '.join(BOUNDARY_SOURCES)}")
        if self.n is not None and (not isinstance(self.n, int) or self.n < 0):
            out.append(f"n must be a non-negative integer (got {self.n!r})")
        if self.l is not None and (not isinstance(self.l, int) or self.l < 0):
            out.append(f"l must be a non-negative integer (got {self.l!r})")
        if not self.x0:
            out.append("x0 needs at least one value")
        if self.xp0 is not None and any(not v > 0 for v in self.xp0):
            out.append("xp0 values must be positive")
        if abs(math.sin(self.phi)) < 1e-14 and 0.0 in self.x0:
            out.append("phi is a multiple of pi, so sin(X0 + phi) = 0 at X0 = 0")
        if self.mode in ("solve", "family-check", "compare") and self.n is None and self.energy is None:
            out.append(f"mode {self.mode} needs --n or --energy")
        if self.mode == "scan-energy":
            if not self.e_range or len(self.e_range) != 2:
                out.append("scan-energy needs --range lo:hi")
            elif not self.e_range[0] < self.e_range[1]:
                out.append("range must satisfy lo < hi")
        if self.mode == "family-check" and len(self.x0) * len(self.xp0 or [None]) < 2:
            out.append("family-check needs at least two gauge choices (x0 and/or xp0 lists)")
        if self.boundary == "analytic" and self.n is None:
            out.append("analytic boundary data needs --n")
        kind = BUILTIN_POTENTIALS.get(str(self.potential).lower())
        if kind is None and not Path(self.potential).exists():
            out.append(f"potential {self.potential!r} is neither built in nor an existing file")
        if kind == "coulomb" and self.n is not None:
            l = self.l if self.l is not None else int(self.params.get("l", 1))
            if self.n <= l:
                out.append(f"Coulomb state needs n > l (got n={self.n}, l={l})")
        return out

    def validate(self) -> "RunConfig":
        probs = self.problems()
        if probs:
            raise ConfigError(probs)
        return self


_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}
_FLOATS = {"hbar", "mass", "energy", "phi", "tol", "error_tol", "rtol", "atol"}
_INTS = {"n", "l", "n_mesh", "n_allowed", "n_forbidden", "workers"}


def _typed(key: str, v):
    # YAML 1.1 reads "1e-08" as a string; numbers given as text are accepted
    if v is None:
        return v
    if key in _FLOATS:
        return float(v)
    if key in _INTS:
        if isinstance(v, float) and not v.is_integer():
            raise ValueError(v)
        return int(v)
    if key in ("x0", "xp0", "e_range", "domain") and isinstance(v, list):
        return [float(t) for t in v]
    return v


_ALIASES = {"range": "e_range", "E": "energy", "E_range": "e_range", "Xp0": "xp0", "X0": "x0"}


def _coerce(values: dict[str, Any]) -> tuple[dict[str, Any], list[str]]:
    out, problems = {}, []
    for key, v in values.items():
        key = _ALIASES.get(key, key).replace("-", "_")
        if key not in _FIELDS:
            problems.append(f"unknown config key {key!r}")
            continue
        if key in ("x0", "xp0") and v is not None and not isinstance(v, list):
            v = [v]
        try:
            v = _typed(key, v)
        except (TypeError, ValueError):
            problems.append(f"{key}: cannot interpret {v!r}")
            continue
        if key == "e_range" and isinstance(v, str):
            try:
                v = [float(s) for s in v.split(":")]
            except ValueError:
                problems.append(f"range {v!r} is not lo:hi")
                continue
        out[key] = v
    return out, problems


def load_config(path: str | Path | None = None, overrides: dict[str, Any] | None = None) -> RunConfig:
    """File values first (YAML or JSON), then explicit overrides; validated at the end.

    A run manifest written by the CLI is accepted as well: its ``config``
    entry is used.
    """
    values: dict[str, Any] = {}
    problems: list[str] = []
    if path is not None:
        text = Path(path).read_text()
        data = (json.loads(text) if Path(path).suffix.lower() == ".json"
                else yaml.safe_load(text)) or {}
        if not isinstance(data, dict):
            raise ConfigError([f"{path}: top level must be a mapping"])
        if "config" in data and isinstance(data["config"], dict):
            data = data["config"]
        got, problems = _coerce(data)
        values.update(got)
    got, more = _coerce(overrides or {})
    values.update(got)
    problems += more
    cfg = RunConfig(**values)
    problems += cfg.problems()
    if problems:
        raise ConfigError(problems)
    return cfg
