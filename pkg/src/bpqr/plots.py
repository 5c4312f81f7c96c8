"""Report figures rendered next to the delimited outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .diagnostics import autocorrelation


def trace_and_acf_figure(names, matrix, path, max_lag=20) -> None:
    """Trace plot and autocorrelation bars, one row per parameter."""
    npar = len(names)
    fig, axes = plt.subplots(npar, 2, figsize=(9.0, 1.9 * npar), squeeze=False)
    lags = np.arange(1, max_lag + 1)
    for i, name in enumerate(names):
        x = matrix[:, i]
        axes[i][0].plot(x, linewidth=0.6, color="tab:blue")
        axes[i][0].set_ylabel(name, fontsize=8)
        acf = [autocorrelation(x, int(l)) for l in lags if l < x.size]
        axes[i][1].bar(lags[: len(acf)], acf, width=0.6, color="tab:gray")
        axes[i][1].set_ylim(-0.5, 1.0)
        axes[i][1].axhline(0.0, color="black", linewidth=0.5)
    axes[0][0].set_title("trace", fontsize=9)
    axes[0][1].set_title("autocorrelation", fontsize=9)
    axes[-1][0].set_xlabel("kept draw")
    axes[-1][1].set_xlabel("lag")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def diagnostics_figure(summaries, path) -> None:
    """Inefficiency factors and convergence Z-scores per parameter."""
    names = [s.name for s in summaries]
    pos = np.arange(len(names))
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10.0, 0.35 * len(names) + 2.0))
    ax1.barh(pos, [s.ineff for s in summaries], color="tab:blue")
    ax1.set_yticks(pos, names, fontsize=7)
    ax1.axvline(1.0, color="black", linewidth=0.8)
    ax1.set_xlabel("inefficiency factor")
    ax2.barh(pos, [s.geweke for s in summaries], color="tab:orange")
    ax2.set_yticks(pos, names, fontsize=7)
    for ref in (-2.58, 2.58):
        ax2.axvline(ref, color="black", linewidth=0.8, linestyle="--")
    ax2.set_xlabel("convergence Z-score")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def effects_figure(blocks, path) -> None:
    """AME, relative risk, and odds ratio against the quantile, with 95% HPDI."""
    ps = [b["p"] for b in blocks]
    fig, axes = plt.subplots(1, 3, figsize=(11.0, 3.4))
    for ax, key, label, ref in zip(axes, ("ame", "rr", "or"),
                                   ("average marginal effect", "relative risk",
                                    "odds ratio"), (0.0, 1.0, 1.0)):
        mean = [b[key]["mean"] for b in blocks]
        lo = [b[key]["mean"] - b[key]["hpdi"][0] for b in blocks]
        hi = [b[key]["hpdi"][1] - b[key]["mean"] for b in blocks]
        ax.errorbar(ps, mean, yerr=[lo, hi], fmt="o-", capsize=3, color="tab:blue")
        ax.axhline(ref, color="black", linewidth=0.8, linestyle="--")
        ax.set_xlabel("quantile")
        ax.set_title(label, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
