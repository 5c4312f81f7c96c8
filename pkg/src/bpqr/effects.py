"""Posterior functionals of covariate contrasts: average marginal effect,
relative risk, and odds ratio by the method of composition.

Each functional pairs every posterior draw with the empirical covariate rows:
for draw m and row (i, t), success probabilities are evaluated at the
contrast's two covariate values with everything else (including alpha_i^(m))
held fixed, then averaged over rows and draws.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .diagnostics import hpdi
from .distributions import cdf_al
from .errors import ConfigError
from .model import PanelData, PosteriorDraws

# Floor/ceiling for probabilities entering ratio denominators; the AL CDF
# underflows to 0 or rounds to 1 in extreme tails.
PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class Contrast:
    """Move covariate column ``col`` of X from value ``a`` to value ``b``."""

    col: int
    a: float
    b: float

    def __post_init__(self):
        if self.col < 1:
            raise ConfigError("contrast column must not be the intercept")


@dataclass(frozen=True)
class EffectResult:
    """Per-draw functional values with posterior summary."""

    kind: str                # "ame", "rr" or "or"
    values: np.ndarray       # (M,) averages over rows, one per kept draw
    mean: float
    std: float
    hpdi_lo: float
    hpdi_hi: float


def prob_success(x_row: np.ndarray, beta: np.ndarray, alpha_i: float, p: float) -> float:
    """Pr(y = 1 | x, beta, alpha) = 1 - F_AL(-x'beta - alpha; 0, 1, p)."""
    index = float(np.asarray(x_row, dtype=float) @ np.asarray(beta, dtype=float)) + alpha_i
    return 1.0 - cdf_al(-index, 0.0, 1.0, p)


def _resolve_p(draws: PosteriorDraws, p: Optional[float]) -> float:
    if p is not None:
        return float(p)
    if "p" in draws.meta:
        return float(draws.meta["p"])
    raise ConfigError("quantile p not given and absent from draw metadata")


def _per_draw_values(draws: PosteriorDraws, data: PanelData, contrast: Contrast,
                     p: float, kind: str) -> np.ndarray:
    if draws.alpha is None:
        raise ConfigError("effects need stored alpha draws; rerun with store_alpha=true")
    if not 1 <= contrast.col < data.k:
        raise ConfigError(f"contrast column {contrast.col} outside X columns 1..{data.k - 1}")
    j = contrast.col
    xj = data.X[:, j]
    out = np.empty(draws.kept)
    for m in range(draws.kept):
        beta_m = draws.beta[m]
        base = data.X @ beta_m - xj * beta_m[j] + data.repeat_by_individual(draws.alpha[m])
        pa = 1.0 - cdf_al(-(contrast.a * beta_m[j] + base), 0.0, 1.0, p)
        pb = 1.0 - cdf_al(-(contrast.b * beta_m[j] + base), 0.0, 1.0, p)
        if kind == "ame":
            out[m] = np.mean(pb - pa)
        else:
            pa = np.clip(pa, PROB_FLOOR, 1.0 - PROB_FLOOR)
            pb = np.clip(pb, PROB_FLOOR, 1.0 - PROB_FLOOR)
            if kind == "rr":
                out[m] = np.mean(pb / pa)
            else:
                out[m] = np.mean((pb / (1.0 - pb)) / (pa / (1.0 - pa)))
    return out


def _finish(kind: str, values: np.ndarray) -> EffectResult:
    lo, hi = hpdi(values) if values.size >= 10 else (float(values.min()), float(values.max()))
    return EffectResult(kind=kind, values=values, mean=float(values.mean()),
                        std=float(values.std(ddof=1)) if values.size > 1 else 0.0,
                        hpdi_lo=lo, hpdi_hi=hi)


def average_marginal_effect(draws: PosteriorDraws, data: PanelData,
                            contrast: Contrast, p: Optional[float] = None) -> EffectResult:
    """Average over rows and draws of Pr(y=1 | x_j=b) - Pr(y=1 | x_j=a)."""
    p = _resolve_p(draws, p)
    return _finish("ame", _per_draw_values(draws, data, contrast, p, "ame"))


def relative_risk(draws: PosteriorDraws, data: PanelData,
                  contrast: Contrast, p: Optional[float] = None) -> EffectResult:
    """Average over rows and draws of the pointwise success-probability ratio."""
    p = _resolve_p(draws, p)
    return _finish("rr", _per_draw_values(draws, data, contrast, p, "rr"))


def odds_ratio(draws: PosteriorDraws, data: PanelData,
               contrast: Contrast, p: Optional[float] = None) -> EffectResult:
    """Average over rows and draws of the pointwise odds ratio."""
    p = _resolve_p(draws, p)
    return _finish("or", _per_draw_values(draws, data, contrast, p, "or"))
