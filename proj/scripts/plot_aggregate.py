#!/usr/bin/env python3
"""Plot per-tick mean and spread of utility, load and coverage from a run directory."""
import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

METRICS = [("utility", "Utility"), ("load_mean", "Load"), ("coverage", "Coverage")]
COLORS = {"cbba": "tab:blue", "central": "tab:orange"}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("run_dir", type=Path)
    ap.add_argument("-o", "--output", type=Path, help="image file (default: <run_dir>/aggregate.png)")
    args = ap.parse_args()

    frames = [pd.read_csv(p) for p in sorted(args.run_dir.glob("aggregate_*.csv"))]
    if not frames:
        raise SystemExit(f"no aggregate_*.csv in {args.run_dir}")
    df = pd.concat(frames)

    fig, axes = plt.subplots(1, len(METRICS), figsize=(5 * len(METRICS), 3.6))
    for ax, (col, title) in zip(axes, METRICS):
        for method, g in df.groupby("method"):
            mean, std = g[f"{col}_mean"], g[f"{col}_std"]
            color = COLORS.get(method)
            ax.plot(g["tick"], mean, label=method, color=color)
            ax.fill_between(g["tick"], mean - std, mean + std, color=color, alpha=0.25, linewidth=0)
        ax.set_title(title)
        ax.set_xlabel("tick")
    axes[0].legend()
    scenario = df["scenario"].iloc[0]
    fig.suptitle(f"{scenario}, {int(df['n_seeds'].iloc[0])} seeds")
    fig.tight_layout()
    out = args.output or args.run_dir / "aggregate.png"
    fig.savefig(out, dpi=120)
    print(out)


if __name__ == "__main__":
    main()
