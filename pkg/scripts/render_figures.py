#!/usr/bin/env python3
"""Draw the CSV datasets written by ``qhjwave emit-figures`` (needs matplotlib).

    qhjwave emit-figures --out runs/figures
    python3 scripts/render_figures.py runs/figures
"""

import sys
from pathlib import Path

from qhjwave.io import read_csv


def main(folder):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    folder = Path(folder)
    fig, axes = plt.subplots(2, 2, figsize=(10, 8))

    _, d = read_csv(folder / "fig1_action.csv")
    axes[0, 0].plot(d[:, 0], d[:, 1], label="X")
    axes[0, 0].plot(d[:, 0], d[:, 2], "--", label="W0")
    axes[0, 0].set_title("quantum vs classical action")

    _, d = read_csv(folder / "fig2_momentum.csv")
    axes[0, 1].plot(d[:, 0], d[:, 1], label="X'")
    axes[0, 1].plot(d[:, 0], d[:, 2], "--", label="p")
    axes[0, 1].set_title("momentum")

    _, d = read_csv(folder / "fig3_envelope.csv")
    axes[1, 0].plot(d[:, 0], d[:, 1], label="1/sqrt(X')")
    axes[1, 0].plot(d[:, 0], d[:, 3], label="psi")
    axes[1, 0].set_title("envelope")

    _, d = read_csv(folder / "fig4_regions.csv")
    for k in (1, 2, 3):
        sel = d[:, 1] == k
        axes[1, 1].plot(d[sel, 0], d[sel, 3], label=f"region {k}")
    axes[1, 1].set_xlim(0, 40)
    axes[1, 1].set_title("three-region radial state")

    for ax in axes.flat:
        ax.legend()
        ax.set_xlabel("x")
    fig.tight_layout()
    target = folder / "figures.png"
    fig.savefig(target, dpi=120)
    print(f"wrote {target}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "runs/figures")
