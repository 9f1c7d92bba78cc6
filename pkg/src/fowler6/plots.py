"""Optional figure rendering for the report paths.

Figures are written next to the delimited output when --plot is passed; the
matplotlib import stays inside the functions so the core never requires it.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_orbit(path, params, spec, orbit, title=""):
    from .energy import hamiltonian_array

    plt = _plt()
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7.0, 5.2), sharex=True)
    ax1.plot(orbit.ts, orbit.ys[:, 0], lw=1.2)
    ax1.set_ylabel("v")
    ax1.grid(alpha=0.3)
    if title:
        ax1.set_title(title)
    H = hamiltonian_array(params, spec, orbit.ys)
    ax2.plot(orbit.ts, H - H[0], lw=0.9)
    ax2.set_ylabel("H drift")
    ax2.set_xlabel("t")
    ax2.grid(alpha=0.3)
    fig.tight_layout()
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def plot_sweep(path, rows):
    plt = _plt()
    rows = [r for r in rows if r is not None]
    a0 = np.array([r[0] for r in rows])
    period = np.array([r[3] for r in rows])
    vmax = np.array([r[4] for r in rows])
    H = np.array([r[5] for r in rows])
    fig, axes = plt.subplots(1, 3, figsize=(10.5, 3.4))
    for ax, yv, lab in zip(axes, (period, H, vmax), ("period", "H", "max v")):
        ax.plot(a0, yv, "o-", ms=4)
        ax.set_xlabel("a0")
        ax.set_ylabel(lab)
        ax.grid(alpha=0.3)
    fig.tight_layout()
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def plot_profile(path, rows):
    plt = _plt()
    r = np.array([row[0] for row in rows])
    u = np.array([row[1] for row in rows])
    res = np.array([row[5] for row in rows])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.5, 3.4))
    ax1.loglog(r, u, "o-", ms=3)
    ax1.set_xlabel("r")
    ax1.set_ylabel("u")
    ax1.grid(alpha=0.3, which="both")
    ax2.loglog(r, np.maximum(res, 1e-18), "o", ms=3)
    ax2.set_xlabel("r")
    ax2.set_ylabel("relative residual")
    ax2.grid(alpha=0.3, which="both")
    fig.tight_layout()
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)
