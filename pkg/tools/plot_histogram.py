#!/usr/bin/env python3
"""Plot a sampling histogram CSV produced by `rnaphase sample`.

Usage: python tools/plot_histogram.py RUN.hist.csv [out.png]
"""

import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def load(path):
    ks, emp, exact, law = [], [], [], []
    for line in open(path):
        if line.startswith("#") or line.startswith("k,"):
            continue
        parts = line.strip().split(",")
        ks.append(int(parts[0]))
        emp.append(float(parts[1]))
        exact.append(float(parts[2]) if parts[2] else np.nan)
        law.append(float(parts[3]) if parts[3] else np.nan)
    return np.array(ks), np.array(emp), np.array(exact), np.array(law)


def main():
    path = sys.argv[1]
    out = sys.argv[2] if len(sys.argv) > 2 else path.replace(".csv", ".png")
    k, emp, exact, law = load(path)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(k, emp, width=0.9, alpha=0.5, label="sampled")
    if np.isfinite(exact).any():
        ax.plot(k, exact, "k.-", lw=1, label="exact pmf")
    if np.isfinite(law).any():
        ax.plot(k, law, "r.-", lw=1, label="limit law")
    ax.set_xlabel("irreducible blocks k")
    ax.set_ylabel("P(X = k)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=130)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
