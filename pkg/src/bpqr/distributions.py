"""Random-variate generation and distribution functions used by the samplers.

Everything draws from an explicitly seeded :class:`RngStream`, so chains are
bit-reproducible and independent substreams can be derived for parallel work.
The asymmetric Laplace (AL) pieces use the normal-exponential mixture
``eps = theta*w + tau*sqrt(w)*u`` with ``w ~ Exp(1)`` and ``u ~ N(0,1)``;
``theta`` and ``tau^2`` are fixed functions of the quantile ``p``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox, SeedSequence
from scipy.special import ndtr, ndtri

from .errors import NumericError

# Intervals holding at least this much normal mass are sampled by inverse CDF;
# anything thinner goes through the exponential-tilted tail rejection path.
TRUNCNORM_INVCDF_MIN_MASS = 1e-6

# Floor on the GIG "chi" parameter: the squared-residual argument can be 0
# exactly, where the inverse-Gaussian route degenerates.
GIG_LAMBDA_FLOOR = 1e-10

_MAX_REJECTION_ROUNDS = 10_000


def _label_word(label) -> int:
    """Map a substream label (int or str) to a stable nonnegative integer."""
    if isinstance(label, (int, np.integer)):
        if label < 0:
            raise ValueError(f"substream labels must be nonnegative, got {label}")
        return int(label)
    if isinstance(label, str):
        digest = hashlib.sha256(label.encode("utf-8")).digest()
        return int.from_bytes(digest[:4], "little")
    raise TypeError(f"substream labels must be int or str, got {type(label).__name__}")


class RngStream:
    """Seeded random stream with deterministic, independent substreams.

    Built on the counter-based Philox generator. Substreams are derived from
    ``(seed, labels)`` via ``SeedSequence`` spawn keys, so the same seed and
    label path always reproduces the same draw sequence, and distinct label
    paths give statistically independent streams.
    """

    __slots__ = ("seed", "labels", "gen")

    def __init__(self, seed: int, labels: tuple = ()):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        self.seed = seed
        self.labels = tuple(_label_word(lab) for lab in labels)
        ss = SeedSequence(entropy=self.seed, spawn_key=self.labels)
        self.gen = Generator(Philox(ss))

    def substream(self, *labels) -> "RngStream":
        """Derive an independent stream from this stream's seed and labels."""
        return RngStream(self.seed, self.labels + tuple(labels))

    def __repr__(self) -> str:  # pragma: no cover
        return f"RngStream(seed={self.seed}, labels={self.labels})"


@dataclass(frozen=True)
class QuantileConstants:
    """Mixture constants for the AL distribution at quantile ``p``."""

    p: float
    theta: float
    tau_sq: float

    @property
    def tau(self) -> float:
        return float(np.sqrt(self.tau_sq))


def quantile_constants(p: float) -> QuantileConstants:
    """Constants theta = (1-2p)/(p(1-p)) and tau^2 = 2/(p(1-p))."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile p must lie in (0, 1), got {p}")
    pq = p * (1.0 - p)
    return QuantileConstants(p=p, theta=(1.0 - 2.0 * p) / pq, tau_sq=2.0 / pq)


def sample_al(rng: RngStream, location=0.0, scale=1.0, p=0.5, size=None):
    """Draw from the asymmetric Laplace via its normal-exponential mixture."""
    if np.any(np.asarray(scale) <= 0.0):
        raise ValueError("scale must be positive")
    qc = quantile_constants(p)
    w = rng.gen.exponential(size=size)
    u = rng.gen.standard_normal(size=size)
    return location + scale * (qc.theta * w + np.sqrt(qc.tau_sq * w) * u)


def cdf_al(x, location=0.0, scale=1.0, p=0.5):
    """Closed-form AL cumulative distribution function.

    With ``s = (x - location)/scale``: ``p*exp((1-p)*s)`` for ``s <= 0`` and
    ``1 - (1-p)*exp(-p*s)`` otherwise. The location point maps to exactly
    ``p``.
    """
    if np.any(np.asarray(scale) <= 0.0):
        raise ValueError("scale must be positive")
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile p must lie in (0, 1), got {p}")
    s = (np.asarray(x, dtype=float) - location) / scale
    # min/max keep the unused np.where branch from overflowing at |s| large
    out = np.where(s <= 0.0, p * np.exp((1.0 - p) * np.minimum(s, 0.0)),
                   1.0 - (1.0 - p) * np.exp(-p * np.maximum(s, 0.0)))
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out)
    return out


def _right_tail_std_normal(rng: RngStream, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Standard normal conditioned on [lo, hi) with lo >= 0, possibly hi = inf.

    Exponential-tilted rejection for wide intervals, uniform rejection for
    narrow ones; both exact.
    """
    out = np.empty_like(lo)
    alpha = 0.5 * (lo + np.sqrt(lo * lo + 4.0))
    narrow = np.isfinite(hi) & (alpha * (hi - lo) < 0.5)

    pending = np.arange(lo.size)
    for _ in range(_MAX_REJECTION_ROUNDS):
        if pending.size == 0:
            return out
        l, h, al = lo[pending], hi[pending], alpha[pending]
        nar = narrow[pending]
        u1 = rng.gen.random(pending.size)
        u2 = rng.gen.random(pending.size)
        with np.errstate(divide="ignore"):
            cand = np.where(nar,
                            l + u1 * np.where(np.isfinite(h), h - l, 0.0),
                            l - np.log1p(-u1) / al)
        log_acc = np.where(nar, 0.5 * (l * l - cand * cand),
                           -0.5 * (cand - al) ** 2)
        ok = (cand < h) & (np.log(np.maximum(u2, 1e-300)) <= log_acc)
        out[pending[ok]] = cand[ok]
        pending = pending[~ok]
    raise NumericError("truncated normal tail rejection failed to converge")


def _truncated_std_normal(rng: RngStream, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Standard normal conditioned on the open interval (a, b)."""
    # Mirror intervals that sit right of the mode so all CDF work happens in
    # the left tail, where ndtr/ndtri keep full relative precision.
    flip = a > 0.0
    lo = np.where(flip, -b, a)
    hi = np.where(flip, -a, b)

    pa = ndtr(lo)
    pb = ndtr(hi)
    mass = pb - pa
    x = np.empty_like(lo)

    easy = mass >= TRUNCNORM_INVCDF_MIN_MASS
    if np.any(easy):
        u = pa[easy] + rng.gen.random(int(easy.sum())) * mass[easy]
        x[easy] = ndtri(np.clip(u, 1e-300, 1.0 - 1e-16))

    hard = ~easy
    if np.any(hard):
        straddle = hard & (lo < 0.0) & (hi > 0.0)
        tail = hard & ~straddle
        if np.any(tail):
            # post-mirror a thin-mass interval lies in the left tail
            x[tail] = -_right_tail_std_normal(rng, -hi[tail], -lo[tail])
        if np.any(straddle):
            # tiny interval containing the mode: uniform rejection, accept
            # probability is essentially one
            idx = np.nonzero(straddle)[0]
            for j in idx:
                while True:
                    cand = lo[j] + rng.gen.random() * (hi[j] - lo[j])
                    if rng.gen.random() <= np.exp(-0.5 * cand * cand):
                        x[j] = cand
                        break

    x = np.minimum(np.maximum(x, np.nextafter(lo, np.inf)), np.nextafter(hi, -np.inf))
    return np.where(flip, -x, x)


def sample_truncnorm(rng: RngStream, mu, var, lower, upper):
    """Draw from N(mu, var) conditioned to (lower, upper).

    Scalar or broadcastable array arguments; open/half-open infinite bounds
    are expressed with ``-inf`` / ``+inf``. Draws land strictly inside the
    interval and are never NaN, including intervals of negligible mass.
    """
    scalar = all(np.ndim(v) == 0 for v in (mu, var, lower, upper))
    mu, var, lower, upper = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (mu, var, lower, upper)))
    if np.any(var <= 0.0):
        raise ValueError("variance must be positive")
    if np.any(~(lower < upper)):
        raise ValueError("truncation interval must satisfy lower < upper")
    sd = np.sqrt(var)
    a = (lower - mu) / sd
    b = (upper - mu) / sd
    x = _truncated_std_normal(rng, np.ravel(a).copy(), np.ravel(b).copy())
    out = mu + sd * x.reshape(mu.shape)
    return float(out) if scalar else out


def sample_gig_half(rng: RngStream, lam, eta):
    """Draw from GIG(1/2, lam, eta), density prop. to x^{-1/2} exp(-(lam/x + eta*x)/2).

    Uses the reciprocal identity: 1/X is inverse-Gaussian with mean
    sqrt(eta/lam) and shape eta, sampled by the Michael-Schucany-Haas
    transformation with rejection. ``lam`` is clamped below at
    ``GIG_LAMBDA_FLOOR``.
    """
    scalar = np.ndim(lam) == 0 and np.ndim(eta) == 0
    lam = np.maximum(np.asarray(lam, dtype=float), GIG_LAMBDA_FLOOR)
    eta = np.asarray(eta, dtype=float)
    if np.any(eta <= 0.0):
        raise ValueError("eta must be positive")
    lam, eta = np.broadcast_arrays(lam, eta)

    mean_ig = np.sqrt(eta / lam)
    y = rng.gen.standard_normal(lam.shape) ** 2
    # small root of the MSH quadratic, in the cancellation-free form
    wq = 1.0 + mean_ig * y / (2.0 * eta)
    x_small = mean_ig / (wq + np.sqrt(wq * wq - 1.0))
    u = rng.gen.random(lam.shape)
    ig = np.where(u <= mean_ig / (mean_ig + x_small), x_small, mean_ig**2 / x_small)
    out = 1.0 / ig
    return float(out) if scalar else out


def sample_invgamma(rng: RngStream, shape, scale, size=None):
    """Draw from inverse-gamma with density prop. to x^{-(shape+1)} exp(-scale/x)."""
    shape = np.asarray(shape, dtype=float)
    scale = np.asarray(scale, dtype=float)
    if np.any(shape <= 0.0) or np.any(scale <= 0.0):
        raise ValueError("inverse-gamma shape and scale must be positive")
    g = rng.gen.gamma(shape, 1.0 / scale, size=size)
    out = 1.0 / g
    if size is None and shape.ndim == 0 and scale.ndim == 0:
        return float(out)
    return out


def sample_mvn(rng: RngStream, mean: np.ndarray, cov_factor: np.ndarray) -> np.ndarray:
    """Draw mean + cov_factor @ eps with eps iid standard normal.

    ``cov_factor`` is any (typically lower-triangular) factor L with
    L L' = covariance.
    """
    mean = np.asarray(mean, dtype=float)
    cov_factor = np.asarray(cov_factor, dtype=float)
    if not np.all(np.isfinite(cov_factor)):
        raise NumericError("covariance factor contains non-finite entries")
    eps = rng.gen.standard_normal(mean.shape[0])
    return mean + cov_factor @ eps
