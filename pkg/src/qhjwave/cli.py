"""Command-line front end.

Every subcommand writes its data files plus ``manifest.json`` (config,
package version, file hashes, check results) into ``--out``. Passing the
manifest back through ``--config`` reproduces the run byte for byte.
"""

from __future__ import annotations

import argparse
import itertools
import math
import sys
from pathlib import Path

import numpy as np
from scipy.integrate import simpson

from . import __version__
from .assembly import (
    compare,
    find_eigenvalues,
    solve_state,
)
from .classical import classical_action, classical_momentum
from .config import BOUNDARY_SOURCES, MODES, RunConfig, load_config
from .errors import ConfigError, IncomparableGrids, NotAvailable, QHJError
from .io import sha256, write_csv, write_json
from .oracle import solve_schrodinger
from .potentials import (
    PotentialKind,
    PotentialModel,
    analytic_eigenfunction,
    analytic_energy,
    coulomb_radial,
)
from .qhje import amplitude_drift, phase_residual, riccati_residual
from .wkb import wkb_wavefunction

RESIDUAL_TOL = 1e-6
DRIFT_TOL = 1e-10


# --- argument parsing -------------------------------------------------------------

def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _params(text: str) -> dict[str, float]:
    out = {}
    for item in text.split(","):
        if not item.strip():
            continue
        key, _, val = item.partition("=")
        if not _:
            raise argparse.ArgumentTypeError(f"parameter {item!r} is not key=value")
        out[key.strip()] = float(val)
    return out


def _pair(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"{text!r} is not lo:hi")
    return [float(parts[0]), float(parts[1])]


def _add_common(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--config", default=None, help="YAML/JSON config or a previous manifest.json")
    p.add_argument("--potential", default=S, help="harmonic, coulomb, or a CSV/YAML potential file")
    p.add_argument("--params", type=_params, default=S, help="comma-separated key=value, e.g. k=1")
    p.add_argument("--domain", type=_pair, default=S, help="a:b")
    p.add_argument("--hbar", type=float, default=S)
    p.add_argument("--mass", type=float, default=S)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--energy", type=float, default=S)
    g.add_argument("--n", type=int, default=S, help="principal/oscillator quantum number")
    p.add_argument("--l", type=int, default=S, help="angular momentum (radial problems)")
    p.add_argument("--phi", type=float, default=S, help="phase offset (default pi/4)")
    p.add_argument("--x0", type=_floats, default=S, help="X(x1) gauge values, comma-separated")
    p.add_argument("--xp0", type=_floats, default=S, help="X'(x1) gauge values, comma-separated")
    p.add_argument("--boundary", choices=BOUNDARY_SOURCES, default=S)
    p.add_argument("--range", dest="e_range", type=_pair, default=S, help="energy range lo:hi")
    p.add_argument("--n-mesh", dest="n_mesh", type=int, default=S)
    p.add_argument("--tol", type=float, default=S, help="join / family tolerance")
    p.add_argument("--error-tol", dest="error_tol", type=float, default=S)
    p.add_argument("--rtol", type=float, default=S)
    p.add_argument("--atol", type=float, default=S)
    p.add_argument("--n-allowed", dest="n_allowed", type=int, default=S)
    p.add_argument("--n-forbidden", dest="n_forbidden", type=int, default=S)
    p.add_argument("--workers", type=int, default=S)
    p.add_argument("--out", default=S)
    p.add_argument("--check", action="store_true", default=S,
                   help="run invariant checks; exit status 1 if any fails")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qhjwave", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        _add_common(sub.add_parser(mode))
    return parser


# --- helpers ----------------------------------------------------------------------

def _expected_nodes(model: PotentialModel, n: int | None) -> int | None:
    return None if n is None else model.radial_quantum_number(n)


def _analytic_fn(model: PotentialModel, n: int | None):
    if n is None or not model.has_analytic:
        return None
    return lambda x: analytic_eigenfunction(model, n, x)


def _metrics(table, reference, window=None):
    try:
        return compare(table, reference, window=window).to_dict()
    except IncomparableGrids as exc:
        return {"error": str(exc)}


def _norm(table) -> float:
    xs = np.concatenate([np.linspace(table.span[0], table.turning.x1, 4001),
                         np.linspace(table.turning.x1, table.turning.x2, 8001)[1:],
                         np.linspace(table.turning.x2, table.span[1], 4001)[1:]])
    return float(simpson(table(xs) ** 2, x=xs))


def _state(cfg: RunConfig, model: PotentialModel, X0: float, Xp0: float | None, phi=None):
    return solve_state(model, n=cfg.n, E=cfg.energy, phi=cfg.phi if phi is None else phi,
                       X0=X0, Xp0=Xp0, boundary=cfg.boundary, grid=cfg.grid_spec(),
                       join_tol=cfg.tol, check_join=False)


def _residuals(run) -> dict:
    return {
        "phase": float(np.max(np.abs(phase_residual(run.action)))),
        "phase_independent_relative": float(np.max(np.abs(phase_residual(run.action, independent=True)))),
        "riccati_I": float(np.max(np.abs(riccati_residual(run.forbidden_I)))),
        "riccati_III": float(np.max(np.abs(riccati_residual(run.forbidden_III)))),
        "amplitude_drift": amplitude_drift(run.action),
    }


def _action_columns(run):
    a = run.action
    x = a.grid
    W0 = classical_action(a.model, a.energy, x, turning=run.turning)
    p = classical_momentum(a.model, a.energy, np.clip(x, run.turning.x1, run.turning.x2))
    return x, a.X, a.Xp, a.Xpp, a.Y, W0, p


# --- modes ------------------------------------------------------------------------

def _mode_solve(cfg, model, out):
    xp0 = cfg.xp0[0] if cfg.xp0 else None
    run = _state(cfg, model, cfg.x0[0], xp0)
    t = run.table
    files = [write_csv(out / "x_psi.csv", ["x", "psi"], [t.grid, t.psi]),
             write_csv(out / "action.csv", ["x", "X", "Xp", "Xpp", "Y", "W0", "p"],
                       _action_columns(run))]
    res = _residuals(run)
    errors = {}
    ref = _analytic_fn(model, cfg.n)
    if ref is not None:
        errors["analytic"] = _metrics(t, ref)
    oracle = solve_schrodinger(model, run.energy)
    errors["oracle"] = _metrics(t, oracle)
    primary = errors.get("analytic", errors["oracle"])
    norm = _norm(t)
    expected = _expected_nodes(model, cfg.n)
    checks = {
        "join": bool(abs(t.report.logderiv_mismatch) < cfg.tol),
        "normalization": abs(norm - 1.0) < 1e-8,
        "positive_Xp": bool(np.all(run.action.Xp > 0)),
        "phase_residual": res["phase"] < RESIDUAL_TOL,
        "riccati_residual": max(res["riccati_I"], res["riccati_III"]) < RESIDUAL_TOL,
        "amplitude_drift": res["amplitude_drift"] < DRIFT_TOL,
        "max_abs_error": bool(primary.get("max_abs_error", math.inf) < cfg.error_tol),
    }
    if expected is not None:
        checks["node_count"] = len(t.nodes) == expected
    summary = {
        "energy": run.energy,
        "turning_points": [run.turning.x1, run.turning.x2],
        "far_points": [run.forbidden_I.far_point, run.forbidden_III.far_point],
        "nodes": list(t.nodes),
        "node_count": len(t.nodes),
        "expected_nodes": expected,
        "peaks": run.action.peak_count(),
        "max_Xp": float(np.max(run.action.Xp)),
        "segment_constants": list(t.segment_constants),
        "family_params": {"X0": run.action.init.X0, "phi": run.action.init.phi,
                          "Xp0": run.action.init.Xp0, "Xpp0": run.action.init.Xpp0,
                          "B": run.action.init.B},
        "boundary": {"source": run.boundary_source, "psi": run.boundary[0], "dpsi": run.boundary[1]},
        "match": t.report.to_dict(),
        "norm": norm,
        "residuals": res,
        "errors": errors,
        "max_abs_error": primary.get("max_abs_error"),
    }
    files.append(write_json(out / "summary.json", summary))
    return files, checks, summary


def _analytic_spectrum(model, lo, hi):
    out = []
    if model.kind is PotentialKind.HARMONIC:
        n = 0
        while (E := analytic_energy(model, n)) < hi:
            if E > lo:
                out.append(E)
            n += 1
    elif model.kind is PotentialKind.COULOMB:
        for n in range(int(model.params["l"]) + 1, 100000):
            E = analytic_energy(model, n)
            if E >= hi:
                break
            if E > lo:
                out.append(E)
    else:
        return None
    return out


def _mode_scan(cfg, model, out):
    lo, hi = cfg.e_range
    roots, reports = find_eigenvalues(model, (lo, hi), cfg.phi, cfg.x0[0],
                                      cfg.xp0[0] if cfg.xp0 else None, n_mesh=cfg.n_mesh,
                                      grid=cfg.grid_spec(), workers=cfg.workers, return_scan=True)
    files = [write_csv(out / "residual_scan.csv",
                       ["E", "value_mismatch", "logderiv_mismatch", "crossings"],
                       [[r.energy for r in reports], [r.value_mismatch for r in reports],
                        [r.logderiv_mismatch for r in reports], [r.crossings for r in reports]])]
    exact = _analytic_spectrum(model, lo, hi)
    edge = 1e-7 * max(1.0, abs(lo), abs(hi))
    summary = {"range": [lo, hi], "eigenvalues": roots}
    checks = {}
    if exact is not None:
        exact = [E for E in exact if E - lo > edge and hi - E > edge]
        summary["analytic"] = exact
        ok = len(exact) == len(roots)
        if ok and roots:
            errs = [abs(a - b) for a, b in zip(roots, exact)]
            summary["errors"] = errs
            ok = max(errs) < 1e-8
        checks["spectrum"] = ok
    files.append(write_json(out / "eigenvalues.json", summary))
    return files, checks, summary


def _mode_family(cfg, model, out):
    gauges = list(itertools.product(cfg.x0, cfg.xp0 or [None]))
    members, tables = [], []
    for X0, Xp0 in gauges:
        try:
            run = _state(cfg, model, X0, Xp0)
        except QHJError as exc:
            members.append({"X0": X0, "Xp0": Xp0, "error": f"{type(exc).__name__}: {exc}"})
            continue
        tables.append(run.table)
        members.append({"X0": X0, "Xp0": run.action.init.Xp0, "peaks": run.action.peak_count(),
                        "X_x2": float(run.action.X[-1]), "B": run.action.init.B, "error": None})
    lo = max(t.span[0] for t in tables) if tables else 0.0
    hi = min(t.span[1] for t in tables) if tables else 0.0
    xs = np.linspace(lo, hi, 4001)
    values = [t(xs) for t in tables]
    pairs = []
    for i, j in itertools.combinations(range(len(values)), 2):
        pairs.append([i, j, float(np.max(np.abs(values[i] - values[j])))])
    worst = max((p[2] for p in pairs), default=math.nan)
    files = [write_csv(out / "family.csv", ["x"] + [f"psi_{k}" for k in range(len(values))],
                     [xs] + values)]
    summary = {"members": members, "pairwise": pairs, "max_deviation": worst}
    files.append(write_json(out / "family_report.json", summary))
    checks = {"members_converged": all(m["error"] is None for m in members),
              "pairwise_deviation": bool(pairs) and worst < cfg.tol}
    return files, checks, summary


def _mode_compare(cfg, model, out):
    run = _state(cfg, model, cfg.x0[0], cfg.xp0[0] if cfg.xp0 else None)
    t = run.table
    ref = _analytic_fn(model, cfg.n)
    oracle = solve_schrodinger(model, run.energy)
    reference = ref if ref is not None else oracle
    inner = run.action.grid[1:-1]
    w = wkb_wavefunction(model, run.energy, inner)
    exact = np.asarray(reference(inner))
    qhje = t(inner)
    sign = 1.0 if float(np.dot(exact, qhje)) >= 0 else -1.0
    wkb_err = np.abs(w.psi_wkb - sign * exact)
    qhje_err = np.abs(qhje - sign * exact)
    near = np.abs(inner - np.clip(inner, run.turning.x1 + 0.1, run.turning.x2 - 0.1)) > 0
    files = [write_csv(out / "wkb.csv", ["x", "psi_wkb", "valid", "psi_qhje", "psi_reference"],
                       [inner, w.psi_wkb, w.validity_mask.astype(float), qhje, sign * exact])]
    summary = {
        "energy": run.energy,
        "qhje": _metrics(t, reference),
        "qhje_vs_oracle": _metrics(t, oracle),
        "wkb": {"amplitude": w.amplitude,
                "max_abs_error_valid": float(np.max(wkb_err[w.validity_mask], initial=0.0)),
                "max_abs_error_near_turning": float(np.max(wkb_err[near], initial=0.0))},
        "qhje_near_turning": float(np.max(qhje_err[near], initial=0.0)),
    }
    files.append(write_json(out / "compare.json", summary))
    checks = {"max_abs_error": bool(summary["qhje"].get("max_abs_error", math.inf) < cfg.error_tol)}
    return files, checks, summary


def _figure_run(cfg, model):
    if cfg.n is None and cfg.energy is None:
        cfg = RunConfig(**{**cfg.to_dict(), "n": 8 if model.kind is not PotentialKind.COULOMB else 3})
    return _state(cfg, model, cfg.x0[0], cfg.xp0[0] if cfg.xp0 else None)


def _mode_figures(cfg, model, out):
    run = _figure_run(cfg, model)
    x, X, Xp, Xpp, Y, W0, p = _action_columns(run)
    _, env, sine, prod = run.table.envelope_parts()
    files = [write_csv(out / "fig1_action.csv", ["x", "X", "W0"], [x, X, W0]),
             write_csv(out / "fig2_momentum.csv", ["x", "Xp", "p"], [x, Xp, p]),
             write_csv(out / "fig3_envelope.csv", ["x", "inv_sqrt_Xp", "sin_X_phi", "product"],
                       [x, env, sine, prod])]

    if model.kind is PotentialKind.COULOMB:
        cmodel, ccfg = model, cfg
    else:
        cmodel = coulomb_radial(1.0, 1 if cfg.l is None else cfg.l, hbar=cfg.hbar, mass=cfg.mass)
        ccfg = RunConfig(**{**cfg.to_dict(), "potential": "coulomb", "params": {}, "domain": None,
                            "n": 3, "energy": None, "phi": 0.01, "boundary": "riccati"})
        if ccfg.l is not None and ccfg.n <= ccfg.l:
            ccfg.n = ccfg.l + 1
    crun = _figure_run(ccfg, cmodel)
    fI, fIII, a = crun.forbidden_I, crun.forbidden_III, crun.action
    xs = [fI.grid, a.grid[1:-1], fIII.grid]
    phase = [fI.Y, a.X[1:-1], fIII.Y]
    region = [np.full(len(v), k, dtype=float) for k, v in zip((1, 2, 3), xs)]
    xcat = np.concatenate(xs)
    files.append(write_csv(out / "fig4_regions.csv", ["x", "region", "phase", "psi"],
                           [xcat, np.concatenate(region), np.concatenate(phase), crun.table(xcat)]))
    # same state at phi = pi/4 for the staircase comparison
    alt = _state(ccfg, cmodel, ccfg.x0[0], ccfg.xp0[0] if ccfg.xp0 else None, phi=math.pi / 4)
    summary = {
        "figures_1_3": {"energy": run.energy, "peaks": run.action.peak_count(),
                        "X_x2_minus_X_x1": float(X[-1] - X[0])},
        "figure_4": {"energy": crun.energy, "phi": crun.action.init.phi,
                     "nodes": list(crun.table.nodes), "peaks": a.peak_count(),
                     "max_Xp": float(np.max(a.Xp)),
                     "max_Xp_phi_pi_over_4": float(np.max(alt.action.Xp)),
                     "peaks_phi_pi_over_4": alt.action.peak_count()},
    }
    ref = _analytic_fn(cmodel, ccfg.n)
    checks = {}
    if ref is not None:
        m = _metrics(crun.table, ref)
        summary["figure_4"]["max_abs_error"] = m.get("max_abs_error")
        checks["figure_4_error"] = bool(m.get("max_abs_error", math.inf) < 1e-6)
    checks["figure_4_nodes"] = len(crun.table.nodes) == cmodel.radial_quantum_number(ccfg.n)
    files.append(write_json(out / "figures.json", summary))
    return files, checks, summary


_DISPATCH = {"solve": _mode_solve, "scan-energy": _mode_scan, "family-check": _mode_family,
             "compare": _mode_compare, "emit-figures": _mode_figures}


def run(cfg: RunConfig) -> int:
    """Execute a validated config; returns the process exit status."""
    cfg.validate()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    model = cfg.model()
    files, checks, _ = _DISPATCH[cfg.mode](cfg, model, out)
    failed = sorted(k for k, v in checks.items() if not v)
    manifest = {
        "package": "qhjwave",
        "version": __version__,
        "config": cfg.to_dict(),
        "potential": model.to_dict(),
        "files": {Path(f).name: sha256(f) for f in files},
        "checks": {k: bool(v) for k, v in sorted(checks.items())},
    }
    write_json(out / "manifest.json", manifest)
    for name in sorted(checks):
        print(f"{'PASS' if checks[name] else 'FAIL'}  {name}")
    print(f"wrote {len(files) + 1} files to {out}")
    return 1 if (cfg.check and failed) else 0


def main(argv: list[str] | None = None) -> int:
    args = vars(build_parser().parse_args(argv))
    config_path = args.pop("config", None)
    try:
        cfg = load_config(config_path, args)
    except ConfigError as exc:
        print("configuration errors:", file=sys.stderr)
        for p in exc.problems:
            print(f"  - {p}", file=sys.stderr)
        return 2
    try:
        return run(cfg)
    except (QHJError, NotAvailable) as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
