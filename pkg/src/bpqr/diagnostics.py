"""Chain quality measures: autocorrelation, inefficiency factor, convergence
Z-scores, highest-posterior-density intervals, and per-parameter summaries.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .model import PosteriorDraws

SUMMARY_ACF_LAGS = (1, 5, 10)


def autocorrelation(draws, lag: int) -> float:
    """Sample autocorrelation at ``lag`` with the biased 1/M normalization."""
    x = np.asarray(draws, dtype=float)
    lag = int(lag)
    if lag < 0 or lag >= x.size:
        raise ValueError(f"lag must satisfy 0 <= lag < {x.size}, got {lag}")
    if lag == 0:
        return 1.0
    if np.ptp(x) == 0.0:
        return 0.0
    xc = x - x.mean()
    c0 = float(xc @ xc)
    if c0 == 0.0:
        return 0.0
    return float(xc[lag:] @ xc[:-lag]) / c0


def _batch_means_long_run_variance(x: np.ndarray) -> float:
    """Long-run variance estimate from nonoverlapping sqrt(M)-sized batches."""
    m = x.size
    bsize = int(math.isqrt(m))
    nbatch = m // bsize
    means = x[: nbatch * bsize].reshape(nbatch, bsize).mean(axis=1)
    return bsize * float(np.var(means, ddof=1))


def inefficiency_factor(draws) -> float:
    """Batch-means inefficiency factor; 1 is iid-equivalent sampling.

    A zero-variance series is defined to have factor 1 (with a warning) so
    that degenerate columns do not poison summary tables.
    """
    x = np.asarray(draws, dtype=float)
    if x.size < 100:
        raise ValueError("inefficiency factor needs at least 100 draws")
    if np.ptp(x) == 0.0:
        warnings.warn("constant series: inefficiency factor defined as 1",
                      RuntimeWarning, stacklevel=2)
        return 1.0
    return _batch_means_long_run_variance(x) / float(np.var(x, ddof=1))


def mcse(draws) -> float:
    """Monte Carlo standard error of the chain mean via batch means."""
    x = np.asarray(draws, dtype=float)
    if x.size < 100:
        raise ValueError("mcse needs at least 100 draws")
    return math.sqrt(_batch_means_long_run_variance(x) / x.size)


def geweke_z(draws, frac_a: float = 0.1, frac_b: float = 0.4) -> float:
    """Z-score comparing the first ``frac_a`` and last ``frac_b`` of the chain.

    Segment variances are batch-means long-run estimates, so the score is
    asymptotically standard normal for a stationary chain.
    """
    x = np.asarray(draws, dtype=float)
    if not (0.0 < frac_a < 1.0 and 0.0 < frac_b < 1.0):
        raise ValueError("segment fractions must lie in (0, 1)")
    if frac_a + frac_b > 1.0:
        raise ValueError("segments overlap: frac_a + frac_b must be <= 1")
    na = int(frac_a * x.size)
    nb = int(frac_b * x.size)
    if na < 4 or nb < 4:
        raise ValueError("segments too short for a variance estimate")
    if np.ptp(x) == 0.0:
        return 0.0
    seg_a = x[:na]
    seg_b = x[x.size - nb:]
    var_a = _batch_means_long_run_variance(seg_a)
    var_b = _batch_means_long_run_variance(seg_b)
    denom = math.sqrt(var_a / na + var_b / nb)
    if denom == 0.0:
        return 0.0
    return float((seg_a.mean() - seg_b.mean()) / denom)


def hpdi(draws, level: float = 0.95) -> tuple:
    """Shortest interval among sorted-draw windows holding ceil(level*M) draws."""
    x = np.sort(np.asarray(draws, dtype=float))
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    if x.size < 10:
        raise ValueError("hpdi needs at least 10 draws")
    window = int(math.ceil(level * x.size))
    if window >= x.size:
        return float(x[0]), float(x[-1])
    widths = x[window - 1:] - x[: x.size - window + 1]
    i = int(np.argmin(widths))
    return float(x[i]), float(x[i + window - 1])


def equal_tailed(draws, level: float = 0.95) -> tuple:
    """Centered sorted-draw window with the same count as the HPDI window."""
    x = np.sort(np.asarray(draws, dtype=float))
    window = int(math.ceil(level * x.size))
    lo = (x.size - window) // 2
    hi = min(lo + window, x.size) - 1
    return float(x[lo]), float(x[hi])


@dataclass(frozen=True)
class ChainSummary:
    """Posterior summary and mixing measures for one parameter."""

    name: str
    mean: float
    std: float
    median: float
    hpdi_lo: float
    hpdi_hi: float
    ineff: float
    geweke: float
    acf1: float
    acf5: float
    acf10: float


def summarize_series(name: str, x: np.ndarray) -> ChainSummary:
    x = np.asarray(x, dtype=float)
    lo, hi = hpdi(x)
    acf = {lag: (autocorrelation(x, lag) if lag < x.size else float("nan"))
           for lag in SUMMARY_ACF_LAGS}
    constant = np.ptp(x) == 0.0
    return ChainSummary(name=name,
                        mean=float(x[0]) if constant else float(x.mean()),
                        std=0.0 if constant else float(x.std(ddof=1)),
                        median=float(np.median(x)), hpdi_lo=lo, hpdi_hi=hi,
                        ineff=inefficiency_factor(x), geweke=geweke_z(x),
                        acf1=acf[1], acf5=acf[5], acf10=acf[10])


def summarize(draws: PosteriorDraws) -> list:
    """One ChainSummary per model parameter (beta, zeta, sigma_alpha2)."""
    matrix = draws.param_matrix()
    return [summarize_series(name, matrix[:, j])
            for j, name in enumerate(draws.param_names())]
