"""Panel containers, model specification, and shared Gibbs update steps.

The latent-variable model is

    z_it = x_it' beta + alpha_i + eps_it,   y_it = 1{z_it > 0},
    alpha_i ~ N(mbar_i' zeta, sigma_alpha^2),

with AL(0, 1, p) errors handled through the normal-exponential mixture, so
each observation carries mixture weight ``w_it`` and latent ``z_it``. The
update functions here are the conditional posteriors common to both sampling
algorithms; they are written against unbalanced panels stored flat with
contiguous per-individual blocks.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .distributions import (QuantileConstants, RngStream, quantile_constants,
                            sample_gig_half, sample_invgamma, sample_truncnorm)
from .errors import ConfigError, DataError, NumericError

# Guards against the mixture weights collapsing and blowing up 1/(tau^2 w).
W_FLOOR = 1e-10
CHOL_JITTER = 1e-10


@dataclass
class PanelData:
    """Unbalanced binary panel stored flat, grouped contiguously by individual.

    ``X`` is (T, k) with column 0 the intercept; ``mundlak_cols`` are the
    X column indices whose individual time-means enter the random-effect
    mean, and ``mbar`` is the (n, q) matrix of those means.
    """

    ids: np.ndarray          # (n,) original labels, order of appearance
    lengths: np.ndarray      # (n,) ints, T_i >= 1
    y: np.ndarray            # (T,) in {0, 1}
    X: np.ndarray            # (T, k), column 0 all ones
    colnames: list           # k names, colnames[0] == "const"
    mundlak_cols: tuple      # X column indices, excluding 0
    mbar: Optional[np.ndarray] = None   # (n, q)
    starts: np.ndarray = field(init=False)

    def __post_init__(self):
        self.lengths = np.asarray(self.lengths, dtype=np.int64)
        self.starts = np.concatenate(([0], np.cumsum(self.lengths)[:-1])).astype(np.int64)
        self.y = np.asarray(self.y, dtype=np.int8)
        self.X = np.asarray(self.X, dtype=float)

    @property
    def n(self) -> int:
        return int(self.lengths.shape[0])

    @property
    def total_obs(self) -> int:
        return int(self.lengths.sum())

    @property
    def k(self) -> int:
        return int(self.X.shape[1])

    @property
    def q(self) -> int:
        return len(self.mundlak_cols)

    def repeat_by_individual(self, values: np.ndarray) -> np.ndarray:
        """Expand an (n,) per-individual vector to the (T,) row layout."""
        return np.repeat(values, self.lengths)

    def segment_sums(self, values: np.ndarray) -> np.ndarray:
        """Per-individual sums of a (T,) or (T, m) row-aligned array."""
        if self.n == 0:
            shape = (0,) if values.ndim == 1 else (0, values.shape[1])
            return np.zeros(shape)
        return np.add.reduceat(values, self.starts, axis=0)


def build_panel(ids_rows, y, covariates, colnames=None, mundlak_cols=None) -> PanelData:
    """Assemble a PanelData from row-level arrays.

    ``ids_rows`` must be grouped contiguously (all rows of an individual
    adjacent). ``covariates`` is (T, k-1) without the intercept;
    ``mundlak_cols`` selects covariates by name or X column index (default:
    every non-intercept column).
    """
    ids_rows = np.asarray(ids_rows)
    y = np.asarray(y)
    covariates = np.asarray(covariates, dtype=float)
    if covariates.ndim != 2 or covariates.shape[0] != ids_rows.shape[0]:
        raise DataError("covariates must be (T, k-1) aligned with ids")
    if y.shape[0] != ids_rows.shape[0]:
        raise DataError("y must align with ids")
    bad = ~np.isin(y, (0, 1))
    if np.any(bad):
        raise DataError(f"y must be 0 or 1; first bad row index {int(np.nonzero(bad)[0][0])}")
    if ids_rows.shape[0] == 0:
        ids, lengths = ids_rows[:0], np.zeros(0, dtype=np.int64)
    else:
        change = np.nonzero(ids_rows[1:] != ids_rows[:-1])[0] + 1
        starts = np.concatenate(([0], change))
        ids = ids_rows[starts]
        if len(np.unique(ids)) != len(ids):
            raise DataError("id blocks are not contiguous")
        lengths = np.diff(np.concatenate((starts, [ids_rows.shape[0]])))

    k = covariates.shape[1] + 1
    if colnames is None:
        colnames = ["const"] + [f"x{j + 2}" for j in range(k - 1)]
    else:
        colnames = ["const"] + list(colnames)
    if len(colnames) != k:
        raise DataError("covariate names do not match covariate count")

    if mundlak_cols is None:
        cols = tuple(range(1, k))
    else:
        cols = []
        for c in mundlak_cols:
            if isinstance(c, str):
                if c not in colnames[1:]:
                    raise ConfigError(f"unknown Mundlak column {c!r}")
                cols.append(colnames.index(c))
            else:
                cols.append(int(c))
        cols = tuple(cols)
    if any(c < 1 or c >= k for c in cols):
        raise ConfigError("Mundlak columns must be non-intercept X columns")

    X = np.column_stack((np.ones(ids_rows.shape[0]), covariates))
    panel = PanelData(ids=ids, lengths=lengths, y=y, X=X,
                      colnames=colnames, mundlak_cols=cols)
    return compute_mundlak_means(panel)


def compute_mundlak_means(data: PanelData) -> PanelData:
    """Fill the per-individual time-means of the selected columns.

    Idempotent; the means are exact arithmetic averages over each
    individual's rows.
    """
    if np.any(data.lengths < 1):
        raise DataError("every individual needs at least one observation")
    cols = list(data.mundlak_cols)
    sums = data.segment_sums(data.X[:, cols]) if cols else np.zeros((data.n, 0))
    mbar = sums / data.lengths[:, None] if data.n else sums
    return replace(data, mbar=mbar)


@dataclass(frozen=True)
class ModelSpec:
    """Quantile plus prior hyperparameters; dimensions match the panel."""

    p: float
    constants: QuantileConstants
    beta0: np.ndarray
    B0: np.ndarray
    zeta0: np.ndarray
    C0: np.ndarray
    c1: float
    d1: float
    B0_inv: np.ndarray = field(init=False, repr=False)
    C0_inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("beta0", "B0", "zeta0", "C0"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        for name, mat in (("B0", self.B0), ("C0", self.C0)):
            if mat.shape[0] != mat.shape[1] or not np.allclose(mat, mat.T):
                raise ConfigError(f"{name} must be symmetric")
            try:
                np.linalg.cholesky(mat)
            except np.linalg.LinAlgError:
                raise ConfigError(f"{name} must be positive definite") from None
        if self.c1 <= 0 or self.d1 <= 0:
            raise ConfigError("c1 and d1 must be positive")
        object.__setattr__(self, "B0_inv", np.linalg.inv(self.B0))
        object.__setattr__(self, "C0_inv", np.linalg.inv(self.C0))

    @classmethod
    def with_default_priors(cls, p: float, k: int, q: int, *,
                            beta_mean=0.0, beta_var=1000.0,
                            zeta_mean=0.0, zeta_var=1000.0,
                            c1=10.0, d1=9.0) -> "ModelSpec":
        beta0 = np.broadcast_to(np.asarray(beta_mean, dtype=float), (k,)).copy()
        zeta0 = np.broadcast_to(np.asarray(zeta_mean, dtype=float), (q,)).copy()
        B0 = np.eye(k) * beta_var if np.ndim(beta_var) == 0 else np.asarray(beta_var, float)
        C0 = np.eye(q) * zeta_var if np.ndim(zeta_var) == 0 else np.asarray(zeta_var, float)
        return cls(p=float(p), constants=quantile_constants(p), beta0=beta0,
                   B0=B0, zeta0=zeta0, C0=C0, c1=float(c1), d1=float(d1))


@dataclass
class ChainState:
    """Current values of all parameters and latent variables."""

    beta: np.ndarray
    alpha: np.ndarray
    zeta: np.ndarray
    sigma_alpha_sq: float
    z: np.ndarray
    w: np.ndarray

    def copy(self) -> "ChainState":
        return ChainState(self.beta.copy(), self.alpha.copy(), self.zeta.copy(),
                          float(self.sigma_alpha_sq), self.z.copy(), self.w.copy())


@dataclass(frozen=True)
class SamplerConfig:
    """Chain driver settings."""

    iterations: int
    burn_in: int
    thin: int = 1
    seed: int = 0
    algorithm: str = "blocked"
    store_alpha: bool = True

    def validate(self):
        if self.algorithm not in ("nonblocked", "blocked"):
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.thin < 1:
            raise ConfigError("thin must be >= 1")
        if not 0 <= self.burn_in < self.iterations:
            raise ConfigError("burn_in must satisfy 0 <= burn_in < iterations")

    @property
    def kept(self) -> int:
        return (self.iterations - self.burn_in) // self.thin


@dataclass
class PosteriorDraws:
    """Burn-in-trimmed, thinned draws plus run metadata."""

    beta: np.ndarray                 # (M, k)
    zeta: np.ndarray                 # (M, q)
    sigma_alpha_sq: np.ndarray       # (M,)
    alpha: Optional[np.ndarray]      # (M, n) or None
    beta_names: list
    zeta_names: list
    meta: dict

    @property
    def kept(self) -> int:
        return int(self.beta.shape[0])

    def param_names(self) -> list:
        return list(self.beta_names) + list(self.zeta_names) + ["sigma_alpha2"]

    def param_matrix(self) -> np.ndarray:
        """Kept draws of (beta, zeta, sigma_alpha2) as columns."""
        return np.column_stack((self.beta, self.zeta, self.sigma_alpha_sq))


def initial_state(data: PanelData, spec: ModelSpec, rng: RngStream) -> ChainState:
    """Prior-centered, sign-feasible starting values.

    The latent z starts at a draw from its truncated-normal full conditional
    given the other initial values, so its scale matches the mixture variance
    at any quantile and the burn-in transient stays short.
    """
    state = ChainState(beta=spec.beta0.copy(),
                       alpha=np.zeros(data.n),
                       zeta=spec.zeta0.copy(),
                       sigma_alpha_sq=spec.d1 / spec.c1,
                       z=np.zeros(data.total_obs),
                       w=np.ones(data.total_obs))
    if data.total_obs:
        state.z = update_z_nonblocked(state, data, spec, rng)
    return state


def draw_mvn_from_precision(rng: RngStream, precision: np.ndarray,
                            rhs: np.ndarray, what: str) -> np.ndarray:
    """Draw N(P^{-1} rhs, P^{-1}) from precision P via Cholesky, never inverting.

    One jittered retry on factorization failure, then NumericError.
    """
    precision = 0.5 * (precision + precision.T)
    try:
        c, low = cho_factor(precision, lower=True)
    except np.linalg.LinAlgError:
        jitter = CHOL_JITTER * float(np.mean(np.diag(precision)))
        try:
            c, low = cho_factor(precision + jitter * np.eye(precision.shape[0]),
                                lower=True)
        except np.linalg.LinAlgError:
            raise NumericError(f"{what}: precision matrix is not positive definite") from None
    mean = cho_solve((c, low), rhs)
    eps = rng.gen.standard_normal(precision.shape[0])
    return mean + solve_triangular(c, eps, lower=True, trans="T")


def update_beta_nonblocked(state: ChainState, data: PanelData, spec: ModelSpec,
                           rng: RngStream) -> np.ndarray:
    """beta | alpha, z, w from weighted least squares against z - alpha - w*theta."""
    qc = spec.constants
    dinv2 = 1.0 / (qc.tau_sq * state.w)
    Xw = data.X * dinv2[:, None]
    precision = Xw.T @ data.X + spec.B0_inv
    resid = state.z - data.repeat_by_individual(state.alpha) - state.w * qc.theta
    rhs = Xw.T @ resid + spec.B0_inv @ spec.beta0
    return draw_mvn_from_precision(rng, precision, rhs, "beta update")


def update_alpha(state: ChainState, data: PanelData, spec: ModelSpec,
                 rng: RngStream) -> np.ndarray:
    """alpha_i | beta, z, w, sigma_alpha^2, zeta; scalar normal per individual."""
    qc = spec.constants
    dinv2 = 1.0 / (qc.tau_sq * state.w)
    resid = state.z - data.X @ state.beta - state.w * qc.theta
    prec = data.segment_sums(dinv2) + 1.0 / state.sigma_alpha_sq
    rhs = data.segment_sums(dinv2 * resid) + (data.mbar @ state.zeta) / state.sigma_alpha_sq
    mean = rhs / prec
    return mean + np.sqrt(1.0 / prec) * rng.gen.standard_normal(data.n)


def update_w(state: ChainState, data: PanelData, spec: ModelSpec,
             rng: RngStream) -> np.ndarray:
    """w_it | beta, alpha, z from GIG(1/2, ((z - x'beta - alpha)/tau)^2, theta^2/tau^2 + 2)."""
    qc = spec.constants
    resid = state.z - data.X @ state.beta - data.repeat_by_individual(state.alpha)
    lam = (resid * resid) / qc.tau_sq
    eta = qc.theta**2 / qc.tau_sq + 2.0
    w = sample_gig_half(rng, lam, eta)
    return np.maximum(np.asarray(w, dtype=float), W_FLOOR)


def update_sigma_alpha(state: ChainState, data: PanelData, spec: ModelSpec,
                       rng: RngStream) -> float:
    """sigma_alpha^2 | alpha, zeta, inverse-gamma with shape (n+c1)/2, scale (d1+SSR)/2."""
    resid = state.alpha - data.mbar @ state.zeta
    shape = 0.5 * (data.n + spec.c1)
    scale = 0.5 * (spec.d1 + float(resid @ resid))
    return sample_invgamma(rng, shape, scale)


def update_zeta(state: ChainState, data: PanelData, spec: ModelSpec,
                rng: RngStream) -> np.ndarray:
    """zeta | alpha, sigma_alpha^2 from the Mundlak-means regression."""
    if data.q == 0:
        return np.zeros(0)
    s2inv = 1.0 / state.sigma_alpha_sq
    precision = s2inv * (data.mbar.T @ data.mbar) + spec.C0_inv
    rhs = s2inv * (data.mbar.T @ state.alpha) + spec.C0_inv @ spec.zeta0
    return draw_mvn_from_precision(rng, precision, rhs, "zeta update")


def update_z_nonblocked(state: ChainState, data: PanelData, spec: ModelSpec,
                        rng: RngStream) -> np.ndarray:
    """z_it | beta, alpha, w, y: univariate truncated normals, sign-coupled to y."""
    qc = spec.constants
    mean = (data.X @ state.beta + data.repeat_by_individual(state.alpha)
            + state.w * qc.theta)
    var = qc.tau_sq * state.w
    lower = np.where(data.y == 1, 0.0, -np.inf)
    upper = np.where(data.y == 1, np.inf, 0.0)
    return sample_truncnorm(rng, mean, var, lower, upper)


def run_chain(data: PanelData, spec: ModelSpec, config: SamplerConfig,
              rng: Optional[RngStream], sweep) -> PosteriorDraws:
    """Shared chain driver: sweep, discard burn-in, keep every thin-th state."""
    config.validate()
    if data.mbar is None:
        raise DataError("panel is missing Mundlak means; call compute_mundlak_means")
    if spec.beta0.shape[0] != data.k or spec.zeta0.shape[0] != data.q:
        raise ConfigError("prior dimensions do not match the panel")
    if rng is None:
        rng = RngStream(config.seed)

    state = initial_state(data, spec, rng)
    kept = config.kept
    beta = np.empty((kept, data.k))
    zeta = np.empty((kept, data.q))
    sigma = np.empty(kept)
    alpha = np.empty((kept, data.n)) if config.store_alpha else None

    t0 = time.perf_counter()
    stored = 0
    for it in range(1, config.iterations + 1):
        try:
            sweep(state, data, spec, rng)
        except NumericError as err:
            raise NumericError(f"iteration {it}: {err}") from err
        if it > config.burn_in and (it - config.burn_in) % config.thin == 0:
            beta[stored] = state.beta
            zeta[stored] = state.zeta
            sigma[stored] = state.sigma_alpha_sq
            if alpha is not None:
                alpha[stored] = state.alpha
            stored += 1
    wall = time.perf_counter() - t0

    zeta_names = [f"zeta_{data.colnames[c]}" for c in data.mundlak_cols]
    meta = {
        "algorithm": config.algorithm,
        "p": spec.p,
        "seed": config.seed,
        "iterations": config.iterations,
        "burn_in": config.burn_in,
        "thin": config.thin,
        "kept": kept,
        "store_alpha": config.store_alpha,
        "n": data.n,
        "total_obs": data.total_obs,
        "wall_time_s": wall,
    }
    return PosteriorDraws(beta=beta, zeta=zeta, sigma_alpha_sq=sigma, alpha=alpha,
                          beta_names=[f"beta_{j + 1}" for j in range(data.k)],
                          zeta_names=zeta_names, meta=meta)
