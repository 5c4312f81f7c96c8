"""Synthetic binary-panel generator for the simulation studies.

Panel lengths are discrete-uniform, covariates are independent uniforms,
random effects are centered on the Mundlak means, and errors are AL(0, 1, p),
so the latent truth is available for white-box checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .distributions import RngStream, quantile_constants
from .errors import ConfigError
from .model import PanelData, build_panel


@dataclass(frozen=True)
class SimSpec:
    """Data-generating configuration for one synthetic panel."""

    n: int = 1000
    t_min: int = 5
    t_max: int = 15
    beta_true: tuple = (0.5, 1.0, 0.6, -0.8)
    zeta_true: tuple = (-1.0, 1.0)
    sigma_alpha_sq_true: float = 1.0
    p: float = 0.5
    x_low: float = -2.0
    x_high: float = 2.0
    # X column indices (intercept = 0) whose time-means drive the random effect
    mundlak_cols: tuple = (2, 3)
    seed: int = 0

    def validate(self):
        if self.t_min < 1 or self.t_max < self.t_min:
            raise ConfigError("panel lengths need 1 <= t_min <= t_max")
        if not 0.0 < self.p < 1.0:
            raise ConfigError(f"quantile p must lie in (0, 1), got {self.p}")
        if not np.all(np.asarray(self.x_low) < np.asarray(self.x_high)):
            raise ConfigError("covariate range needs x_low < x_high")
        if self.sigma_alpha_sq_true <= 0.0:
            raise ConfigError("sigma_alpha_sq_true must be positive")
        if len(self.zeta_true) != len(self.mundlak_cols):
            raise ConfigError("zeta_true length must match mundlak_cols")
        k = len(self.beta_true)
        if any(c < 1 or c >= k for c in self.mundlak_cols):
            raise ConfigError("mundlak_cols must be non-intercept X columns")


@dataclass
class SimOutput:
    """Generated panel plus the latent truth behind it."""

    panel: PanelData
    z: np.ndarray
    alpha: np.ndarray
    xi: np.ndarray
    epsilon: np.ndarray
    count_zeros: int
    count_ones: int
    spec: SimSpec = field(repr=False, default=None)


def generate(spec: SimSpec, rng: Optional[RngStream] = None) -> SimOutput:
    """Draw one panel: lengths, covariates, random effects, AL errors, outcomes."""
    spec.validate()
    if rng is None:
        rng = RngStream(spec.seed)
    gen = rng.gen

    beta = np.asarray(spec.beta_true, dtype=float)
    zeta = np.asarray(spec.zeta_true, dtype=float)
    k = beta.size

    lengths = gen.integers(spec.t_min, spec.t_max + 1, size=spec.n)
    total = int(lengths.sum())
    ids_rows = np.repeat(np.arange(1, spec.n + 1), lengths)
    covariates = gen.uniform(spec.x_low, spec.x_high, size=(total, k - 1))

    starts = np.concatenate(([0], np.cumsum(lengths)[:-1]))
    X = np.column_stack((np.ones(total), covariates))
    cols = list(spec.mundlak_cols)
    sums = np.add.reduceat(X[:, cols], starts, axis=0) if spec.n else np.zeros((0, len(cols)))
    mbar = sums / lengths[:, None]

    xi = np.sqrt(spec.sigma_alpha_sq_true) * gen.standard_normal(spec.n)
    alpha = mbar @ zeta + xi

    qc = quantile_constants(spec.p)
    w = gen.exponential(size=total)
    u = gen.standard_normal(total)
    epsilon = qc.theta * w + np.sqrt(qc.tau_sq * w) * u

    z = X @ beta + np.repeat(alpha, lengths) + epsilon
    y = (z > 0.0).astype(np.int8)

    panel = build_panel(ids_rows, y, covariates,
                        mundlak_cols=list(spec.mundlak_cols))
    ones = int(y.sum())
    return SimOutput(panel=panel, z=z, alpha=alpha, xi=xi, epsilon=epsilon,
                     count_zeros=total - ones, count_ones=ones, spec=spec)
