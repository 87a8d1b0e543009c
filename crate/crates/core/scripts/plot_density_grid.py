"""Plot the output of `fcgam density-grid`: density curves per θ and the
median sweep over Λ.

    fcgam density-grid --lambda 0.5,1,2 --shape-u 3 --shape-v 2 --out-dir grid
    python plot_density_grid.py grid
"""

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main(directory):
    d = Path(directory)
    grid = pd.read_csv(d / "density_grid.csv")
    medians = pd.read_csv(d / "medians.csv")

    lambdas = sorted(grid.capital_lambda.unique())
    fig, axes = plt.subplots(1, len(lambdas), figsize=(4 * len(lambdas), 3.2), squeeze=False)
    for ax, lam in zip(axes[0], lambdas):
        cell = grid[grid.capital_lambda == lam]
        for theta, curve in cell.groupby("theta"):
            ax.plot(curve.r, curve.pdf, label=f"θ = {theta:g}")
        xmax = cell[cell.cdf <= 0.95].r.max()
        ax.set_xlim(0, xmax)
        su, sv = cell.shape_u.iloc[0], cell.shape_v.iloc[0]
        ax.set_title(f"Λ = {lam:g}, δ = ({su:g}, {sv:g})")
        ax.set_xlabel("r")
    axes[0][0].set_ylabel("density")
    axes[0][0].legend()
    fig.tight_layout()
    fig.savefig(d / "density_grid.png", dpi=150)

    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    for theta, sweep in medians.groupby("theta"):
        ax.plot(sweep.capital_lambda, sweep["median"], marker="o", label=f"θ = {theta:g}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("Λ")
    ax.set_ylabel("median of R")
    ax.legend()
    fig.tight_layout()
    fig.savefig(d / "medians.png", dpi=150)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else ".")
