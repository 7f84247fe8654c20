"""Figure rendering for solver runs (file output only)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_dual_trajectory(traj, path, band=None):
    """Dual value per iteration with its running average; the band report,
    when given, adds the target interval as horizontal lines."""
    fig, ax = plt.subplots(figsize=(8, 5))
    it = np.arange(1, traj.iterations + 1)
    ax.plot(it, traj.d, lw=0.6, alpha=0.55, label="dual value", color="tab:blue")
    ax.plot(it, traj.cesaro, lw=1.8, label="running average", color="tab:orange")
    if band is not None:
        ax.axhline(band.band_low, color="tab:green", ls="--", lw=1.0,
                   label="band lower edge")
        ax.axhline(band.band_high, color="tab:red", ls="--", lw=1.0,
                   label="band upper edge")
    ax.set_xlabel("iteration")
    ax.set_ylabel("dual value")
    ax.set_title(f"price iteration, step {traj.config.delta:g}, mode {traj.config.mode}")
    ax.legend(loc="best", fontsize=9)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def plot_prices(traj, path):
    """Per-link price trajectories."""
    fig, ax = plt.subplots(figsize=(8, 5))
    it = np.arange(1, traj.iterations + 1)
    for i, link in enumerate(traj.net.links):
        ax.plot(it, traj.prices[:, i], lw=0.9, label=link.name)
    ax.set_xlabel("iteration")
    ax.set_ylabel("link price")
    ax.set_title("link prices")
    if len(traj.net.links) <= 12:
        ax.legend(loc="best", fontsize=8, ncols=2)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
