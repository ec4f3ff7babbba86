#!/usr/bin/env python3
"""Render the CSV artifacts of a smoothing run as heatmaps and residual plots.

Usage: python3 docs/plot_surfaces.py <run-directory> [output.png]
"""
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd


def load_surface(path: Path) -> np.ndarray:
    table = pd.read_csv(path)
    m = int(table["k1"].max())
    return table["value"].to_numpy().reshape(m, m)


def main() -> int:
    if len(sys.argv) < 2:
        print(__doc__)
        return 1
    run = Path(sys.argv[1])
    out = Path(sys.argv[2]) if len(sys.argv) > 2 else run / "surfaces.png"

    panels = [(run / "surface.csv", "estimate")]
    if (run / "truth.csv").exists():
        panels.append((run / "truth.csv", "truth"))

    fig, axes = plt.subplots(1, len(panels) + 1, figsize=(5 * (len(panels) + 1), 4))
    for ax, (path, title) in zip(axes, panels):
        surface = load_surface(path)
        image = ax.imshow(surface, origin="lower", extent=(0, 1, 0, 1), cmap="viridis")
        ax.set_title(title)
        fig.colorbar(image, ax=ax, shrink=0.8)

    residuals = pd.read_csv(run / "residuals.csv")
    axes[-1].semilogy(residuals["iteration"], residuals["delta"])
    axes[-1].set_xlabel("iteration")
    axes[-1].set_ylabel("squared projected residual norm")
    axes[-1].set_title("residuals")

    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
