"""Figure rendering for CLI reports (headless Agg backend).

Every renderer takes data already computed by the caller and writes one PNG;
nothing here recomputes physics, so the figures always match the delimited
output written next to them.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = [
    "save_timeseries_figure",
    "save_compare_figure",
    "save_sector_occupation_figure",
    "save_block_heatmap",
    "save_state_heatmap",
]

_FLOOR = 1e-16  # log-scale floor for magnitude heatmaps


def save_timeseries_figure(path, times, names, means, stderrs, title):
    """Observable means with +-1 stderr bands; means is (n_times, n_obs)."""
    times = np.asarray(times, dtype=float)
    means = np.asarray(means, dtype=float)
    stderrs = np.asarray(stderrs, dtype=float)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for o, name in enumerate(names):
        line, = ax.plot(times, means[:, o], marker="o", markersize=3,
                        label=name)
        ax.fill_between(times, means[:, o] - stderrs[:, o],
                        means[:, o] + stderrs[:, o],
                        color=line.get_color(), alpha=0.25, linewidth=0)
    ax.set_xlabel("time")
    ax.set_ylabel("expectation value")
    ax.set_title(title)
    if names:
        ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_compare_figure(path, times, names, series, stderrs, title):
    """Per-observable panels overlaying methods.

    series maps method name -> (n_times, n_obs) array; stderrs maps method
    name -> same-shape array or None (drawn as error bars when present).
    """
    times = np.asarray(times, dtype=float)
    n_obs = max(len(names), 1)
    fig, axes = plt.subplots(n_obs, 1, figsize=(7.0, 2.8 * n_obs),
                             sharex=True, squeeze=False)
    styles = {"dense": "-", "block": "--", "qjmc": ":"}
    for o, name in enumerate(names):
        ax = axes[o][0]
        for method, values in series.items():
            vals = np.asarray(values, dtype=float)[:, o]
            err = stderrs.get(method)
            if err is not None:
                ax.errorbar(times, vals, yerr=np.asarray(err)[:, o],
                            fmt="o", markersize=3, capsize=2, label=method)
            else:
                ax.plot(times, vals, styles.get(method, "-"), label=method)
        ax.set_ylabel(name)
        ax.grid(True, alpha=0.3)
        ax.legend(loc="best", fontsize=8)
    axes[-1][0].set_xlabel("time")
    axes[0][0].set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sector_occupation_figure(path, times, weights, labels, title):
    """Stacked sector occupation weights; weights is (n_sectors, n_times)."""
    times = np.asarray(times, dtype=float)
    weights = np.asarray(weights, dtype=float)
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    ax.stackplot(times, weights, labels=labels, alpha=0.8)
    ax.set_xlabel("time")
    ax.set_ylabel("mean sector weight")
    ax.set_ylim(0.0, 1.05)
    ax.set_title(title)
    ax.legend(loc="upper right", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_block_heatmap(path, matrix, boundaries, title):
    """log10 magnitude of a superoperator with block boundary lines."""
    mag = np.log10(np.maximum(np.abs(np.asarray(matrix)), _FLOOR))
    fig, ax = plt.subplots(figsize=(6.0, 5.2))
    image = ax.imshow(mag, cmap="viridis", interpolation="nearest")
    for b in boundaries:
        if 0 < b < mag.shape[0]:
            ax.axhline(b - 0.5, color="white", linewidth=0.8)
            ax.axvline(b - 0.5, color="white", linewidth=0.8)
    fig.colorbar(image, ax=ax, label="log10 |entry|")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_state_heatmap(path, rho, title):
    """Magnitude heatmap of a density matrix."""
    fig, ax = plt.subplots(figsize=(5.5, 4.8))
    image = ax.imshow(np.abs(np.asarray(rho)), cmap="magma",
                      interpolation="nearest")
    fig.colorbar(image, ax=ax, label="|rho entry|")
    ax.set_xlabel("column")
    ax.set_ylabel("row")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
