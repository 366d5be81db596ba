#!/usr/bin/env python3
"""Plot a sparsification sweep CSV produced by `rnaphase bench`.

Usage: python tools/plot_sweep.py RUN.sweep.csv [out.png]
"""

import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def main():
    path = sys.argv[1]
    out = sys.argv[2] if len(sys.argv) > 2 else path.replace(".csv", ".png")
    cand = defaultdict(list)
    tf = defaultdict(list)
    ts = defaultdict(list)
    for line in open(path):
        if line.startswith("#") or line.startswith("n,"):
            continue
        p = line.strip().split(",")
        n = int(p[0])
        cand[n].append(int(p[2]))
        tf[n].append(float(p[4]))
        ts[n].append(float(p[5]))
    ns = sorted(cand)
    fig, axes = plt.subplots(1, 2, figsize=(11, 4))
    axes[0].loglog(ns, [np.mean(cand[n]) for n in ns], "o-", label="candidates")
    axes[0].set_xlabel("n")
    axes[0].set_ylabel("mean candidate count")
    axes[0].legend()
    axes[1].loglog(ns, [np.mean(tf[n]) for n in ns], "o-", label="full")
    axes[1].loglog(ns, [np.mean(ts[n]) for n in ns], "s-", label="sparse")
    axes[1].set_xlabel("n")
    axes[1].set_ylabel("wall clock (ms)")
    axes[1].legend()
    fig.tight_layout()
    fig.savefig(out, dpi=130)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
