"""Render evaluation tables as PNG figures next to the TSV files.

matplotlib is imported lazily so the data-only paths never pay for it.
"""

from __future__ import annotations

import numpy as np

from .significance import NullDistribution, binomial_cdf
from .toleval import SweepResult


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_sweep(sweep: SweepResult, recall_path, precision_path) -> None:
    """One line per tolerance, threshold quantile on the x axis."""
    _plot_measure(sweep.quantiles, sweep.deltas, sweep.recall, "recall", recall_path)
    _plot_measure(
        sweep.quantiles, sweep.deltas, sweep.precision, "precision", precision_path
    )


def _plot_measure(quantiles, deltas, values, measure: str, path) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.2))
    for j, d in enumerate(deltas):
        ax.plot(quantiles, values[:, j], lw=2, label=f"delta={d}")
    ax.set_xlabel("threshold (quantile)")
    ax.set_ylabel(measure)
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_simulated(
    quantiles, simulated: np.ndarray, observed, measure: str, delta: int, path
) -> None:
    """Thin grey replicate curves with the observed curve on top."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.2))
    for r in range(simulated.shape[1]):
        ax.plot(quantiles, simulated[:, r], color="0.75", lw=0.6, zorder=1)
    ax.plot(quantiles, observed, color="tab:orange", lw=2, zorder=2, label="observed")
    ax.plot([], [], color="0.75", lw=0.6, label="simulated")
    ax.set_xlabel("threshold (quantile)")
    ax.set_ylabel(f"{measure} (delta={delta})")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_null_distribution(null: NullDistribution, label: str, path) -> None:
    """Simulated ECDF as steps against the fitted binomial CDF."""
    plt = _pyplot()
    support = np.arange(null.samples[0], null.samples[-1] + 1)
    empirical = np.searchsorted(null.samples, support, side="right") / null.replicates
    fitted = [binomial_cdf(null.n_trials, null.p_hat, int(k)) for k in support]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.step(support, empirical, where="post", lw=2, label="simulated")
    ax.plot(support, fitted, lw=2, label="binomial")
    ax.set_xlabel(label)
    ax.set_ylabel("cumulative probability")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
