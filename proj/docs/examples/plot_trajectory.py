#!/usr/bin/env python3
"""Plot diraclab trajectory CSVs.

Usage:
    python3 plot_trajectory.py trajectory.csv [--snapshots snapshots.csv]
                               [--hj hj_trajectory.csv] [--out figure.png]
"""

import argparse
import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_csv(path):
    cols = defaultdict(list)
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            for key, value in row.items():
                try:
                    cols[key].append(float(value))
                except ValueError:
                    cols[key].append(value)
    return cols


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("trajectory")
    ap.add_argument("--snapshots")
    ap.add_argument("--hj")
    ap.add_argument("--out", default="trajectory.png")
    args = ap.parse_args()

    traj = read_csv(args.trajectory)
    n_panels = 3 if args.snapshots else 2
    fig, axes = plt.subplots(1, n_panels, figsize=(5 * n_panels, 4))

    ax = axes[0]
    ax.plot(traj["t"], traj["rho"], label="rho")
    ax.plot(traj["t"], traj["I"], "--", label="I")
    if args.hj:
        hj = read_csv(args.hj)
        ax.plot(hj["t"], hj["rho"], ":", label="rho (HJ limit)")
    ax.set_xlabel("t")
    ax.set_yscale("log")
    ax.legend()
    ax.set_title("population size")

    ax = axes[1]
    ax.plot(traj["t"], traj["xbar"], label="xbar (PDE)")
    if args.hj:
        ax.plot(hj["t"], hj["xbar"], ":", label="xbar (HJ limit)")
    ax.set_xlabel("t")
    ax.legend()
    ax.set_title("dominant trait")

    if args.snapshots:
        snaps = read_csv(args.snapshots)
        by_time = defaultdict(lambda: ([], []))
        for t, x, n in zip(snaps["t"], snaps["x"], snaps["n"]):
            by_time[t][0].append(x)
            by_time[t][1].append(n)
        ax = axes[2]
        for t in sorted(by_time):
            xs, ns = by_time[t]
            ax.plot(xs, ns, label=f"t = {t:g}")
        ax.set_xlabel("x")
        ax.set_ylabel("n")
        if len(by_time) <= 8:
            ax.legend()
        ax.set_title("density snapshots")

    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
