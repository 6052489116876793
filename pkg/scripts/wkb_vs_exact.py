#!/usr/bin/env python3
"""Tabulate WKB and QHJE errors against Hermite functions for several harmonic states.

    python3 scripts/wkb_vs_exact.py --states 2 4 8
"""

import argparse
import math
from pathlib import Path

import numpy as np

from qhjwave import assembly, potentials, wkb
from qhjwave.io import write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--states", type=int, nargs="+", default=[2, 4, 8])
    ap.add_argument("--out", default="runs/wkb")
    args = ap.parse_args()

    model = potentials.harmonic()
    for n in args.states:
        E = n + 0.5
        run = assembly.solve_state(model, n=n)
        tp = run.turning
        xs = np.linspace(tp.x1, tp.x2, 2003)[1:-1]
        exact = potentials.analytic_eigenfunction(model, n, xs)
        w = wkb.wkb_wavefunction(model, E, xs)
        err_wkb = np.abs(w.psi_wkb - exact)
        err_qhje = np.abs(run.table(xs) - exact)
        write_csv(Path(args.out) / f"wkb_n{n}.csv", ["x", "exact", "wkb", "valid", "err_wkb", "err_qhje"],
                  [xs, exact, w.psi_wkb, w.validity_mask.astype(float), err_wkb, err_qhje])
        mid = np.array([0.5 * math.sqrt(2 * n + 1)])
        at_mid = abs(wkb.wkb_wavefunction(model, E, mid).psi_wkb[0]
                     - potentials.analytic_eigenfunction(model, n, mid)[0])
        print(f"n={n}: WKB error at x2/2 {at_mid:.3e}, in valid zone {err_wkb[w.validity_mask].max():.3e}, "
              f"QHJE max error {err_qhje.max():.3e}")


if __name__ == "__main__":
    main()
