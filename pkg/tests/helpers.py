"""Shared test utilities: Monte Carlo bands, dense oracles, small panels."""

import numpy as np

from bpqr import RngStream, build_panel
from bpqr.model import ChainState, ModelSpec, PanelData


def mc_close(sample, target, nse=4.0):
    """|mean(sample) - target| within nse Monte Carlo standard errors."""
    sample = np.asarray(sample, dtype=float)
    se = sample.std(ddof=1) / np.sqrt(sample.size)
    return abs(sample.mean() - target) <= nse * se


def fraction_close(sample_bool, target, nse=4.0):
    x = np.asarray(sample_bool, dtype=float)
    se = np.sqrt(target * (1.0 - target) / x.size)
    return abs(x.mean() - target) <= nse * se


def random_panel(rng_seed, n=5, t_min=1, t_max=4, k=3, mundlak_cols=None,
                 binary_balance=True) -> PanelData:
    """Small random panel with arbitrary (not model-based) outcomes."""
    gen = np.random.default_rng(rng_seed)
    lengths = gen.integers(t_min, t_max + 1, size=n)
    total = int(lengths.sum())
    ids = np.repeat(np.arange(n), lengths)
    cov = gen.normal(0.0, 1.0, size=(total, k - 1))
    y = gen.integers(0, 2, size=total)
    if binary_balance and total >= 2:
        y[0], y[1] = 0, 1
    return build_panel(ids, y, cov, mundlak_cols=mundlak_cols)


def random_state(gen, data: PanelData) -> ChainState:
    return ChainState(
        beta=gen.normal(0, 1, data.k),
        alpha=gen.normal(0, 1, data.n),
        zeta=gen.normal(0, 1, data.q),
        sigma_alpha_sq=float(gen.uniform(0.3, 2.0)),
        z=np.where(data.y == 1, 1.0, -1.0) * gen.uniform(0.1, 2.0, data.total_obs),
        w=gen.uniform(0.2, 3.0, data.total_obs),
    )


def dense_gls_beta_moments(state, data, spec: ModelSpec):
    """Posterior (mean, cov) of beta given (alpha, z, w) by dense linear algebra."""
    qc = spec.constants
    Dinv2 = np.diag(1.0 / (qc.tau_sq * state.w))
    X = data.X
    resid = state.z - data.repeat_by_individual(state.alpha) - state.w * qc.theta
    prec = X.T @ Dinv2 @ X + np.linalg.inv(spec.B0)
    cov = np.linalg.inv(prec)
    mean = cov @ (X.T @ Dinv2 @ resid + np.linalg.inv(spec.B0) @ spec.beta0)
    return mean, cov


def dense_marginal_beta_moments(state, data, spec: ModelSpec):
    """Posterior (mean, cov) of beta with alpha integrated out, dense Omega."""
    qc = spec.constants
    prec = np.linalg.inv(spec.B0).copy()
    rhs = np.linalg.inv(spec.B0) @ spec.beta0
    for i in range(data.n):
        sl = slice(data.starts[i], data.starts[i] + data.lengths[i])
        d = qc.tau_sq * state.w[sl]
        omega = state.sigma_alpha_sq * np.ones((d.size, d.size)) + np.diag(d)
        oinv = np.linalg.inv(omega)
        Xi = data.X[sl]
        ri = (state.z[sl] - float(data.mbar[i] @ state.zeta) - state.w[sl] * qc.theta)
        prec += Xi.T @ oinv @ Xi
        rhs += Xi.T @ oinv @ ri
    cov = np.linalg.inv(prec)
    return cov @ rhs, cov


def dense_zeta_moments(state, data, spec: ModelSpec):
    """Posterior (mean, cov) of zeta given (alpha, sigma^2) by dense weighting."""
    s2inv = 1.0 / state.sigma_alpha_sq
    prec = s2inv * (data.mbar.T @ data.mbar) + np.linalg.inv(spec.C0)
    cov = np.linalg.inv(prec)
    mean = cov @ (s2inv * data.mbar.T @ state.alpha + np.linalg.inv(spec.C0) @ spec.zeta0)
    return mean, cov


def empty_panel(k=2, mundlak_cols=(1,)) -> PanelData:
    """Zero-individual panel for prior-recovery checks."""
    return build_panel(np.zeros(0, dtype=int), np.zeros(0, dtype=int),
                       np.zeros((0, k - 1)), mundlak_cols=list(mundlak_cols))


def fixed_mean_draws(update, state, data, spec, seed, reps):
    """Repeated conditional draws from one update, fresh stream each time."""
    out = []
    root = RngStream(seed)
    for r in range(reps):
        out.append(update(state, data, spec, root.substream(r)))
    return np.asarray(out)


def brute_force_effect(draws, panel, contrast, p, kind):
    """Triple loop over (i, t, m) through scalar success probabilities."""
    from bpqr import prob_success
    total = 0.0
    count = 0
    j = contrast.col
    for m in range(draws.kept):
        beta = draws.beta[m]
        for i in range(panel.n):
            for t in range(panel.lengths[i]):
                row = panel.X[panel.starts[i] + t].copy()
                row[j] = contrast.a
                pa = prob_success(row, beta, draws.alpha[m, i], p)
                row[j] = contrast.b
                pb = prob_success(row, beta, draws.alpha[m, i], p)
                if kind == "ame":
                    total += pb - pa
                elif kind == "rr":
                    total += pb / pa
                else:
                    total += (pb / (1 - pb)) / (pa / (1 - pa))
                count += 1
    return total / count


def make_mixed_panel(n, p, seed):
    """Panel with three time-varying covariates and two time-invariant
    indicators; the random-effect mean uses the time-varying means only, so
    the indicator coefficients stay identified.

    Returns (panel, true_values) with truth ordered like param_matrix.
    """
    from bpqr.distributions import quantile_constants
    gen = RngStream(seed).gen
    qc = quantile_constants(p)
    lengths = gen.integers(3, 9, size=n)
    total = int(lengths.sum())
    ids = np.repeat(np.arange(n), lengths)
    tv = gen.uniform(-2, 2, size=(total, 3))
    d1 = gen.random(n) < 0.4
    d2 = gen.random(n) < 0.3
    iv = np.column_stack((np.repeat(d1, lengths), np.repeat(d2, lengths))).astype(float)
    cov = np.column_stack((tv, iv))
    starts = np.concatenate(([0], np.cumsum(lengths)[:-1]))
    beta = np.array([0.3, 0.8, -0.6, 0.5, -0.7, 0.9])
    zeta = np.array([-0.8, 0.7, 0.5])
    X = np.column_stack((np.ones(total), cov))
    mbar = np.add.reduceat(X[:, [1, 2, 3]], starts, axis=0) / lengths[:, None]
    alpha = mbar @ zeta + gen.standard_normal(n)
    w = gen.exponential(size=total)
    u = gen.standard_normal(total)
    z = X @ beta + np.repeat(alpha, lengths) + qc.theta * w + np.sqrt(qc.tau_sq * w) * u
    panel = build_panel(ids, (z > 0).astype(int), cov,
                        colnames=["v1", "v2", "v3", "d1", "d2"],
                        mundlak_cols=["v1", "v2", "v3"])
    return panel, np.concatenate((beta, zeta, [1.0]))


def gig_half_numeric_cdf(lam, eta, upper=60.0):
    """CDF of GIG(1/2, lam, eta) by quadrature of the unnormalized density."""
    from scipy.integrate import quad

    def density(x):
        return x ** -0.5 * np.exp(-0.5 * (lam / x + eta * x))

    norm, _ = quad(density, 0.0, np.inf)
    grid = np.concatenate((np.linspace(1e-8, 0.05, 80),
                           np.linspace(0.05, 3.0, 260),
                           np.linspace(3.0, upper, 160)))
    cdf_grid = np.empty_like(grid)
    acc, prev = 0.0, 0.0
    for i, g in enumerate(grid):
        step, _ = quad(density, prev, g)
        acc += step
        cdf_grid[i] = acc / norm
        prev = g

    def cdf(x):
        return np.interp(x, grid, cdf_grid, left=0.0, right=1.0)

    return cdf


def fixed_design(seed, n, t_len, x_scale=2.0):
    """Fixed small design for joint-distribution simulator checks."""
    gen = np.random.default_rng(seed)
    lengths = np.full(n, t_len, dtype=np.int64)
    total = n * t_len
    cov = gen.uniform(-x_scale, x_scale, size=(total, 1))
    X = np.column_stack((np.ones(total), cov))
    starts = np.concatenate(([0], np.cumsum(lengths)[:-1]))
    mbar = np.add.reduceat(X[:, [1]], starts, axis=0) / lengths[:, None]
    return X, mbar, lengths, starts


def _regen_data(gen, X, mbar, lengths, beta, alpha, zeta, qc):
    """Draw the observation layer (w, z, y) given the parameter layer."""
    total = X.shape[0]
    w = gen.exponential(size=total)
    u = gen.standard_normal(total)
    z = X @ beta + np.repeat(alpha, lengths) + qc.theta * w + np.sqrt(qc.tau_sq * w) * u
    return w, z, (z > 0.0).astype(np.int8)


def gir_marginal_conditional(spec_args, design, reps, seed):
    """Independent joint draws: parameters from priors, then the data layer.

    Returns the (reps, 4) matrix of (beta_1, beta_2, zeta, sigma_alpha_sq).
    The recorded functionals involve parameters only, so the generated
    observables are drawn (to complete the joint) and discarded.
    """
    from bpqr import quantile_constants
    X, mbar, lengths, starts = design
    c1, d1 = spec_args["c1"], spec_args["d1"]
    gen = RngStream(seed).gen
    qc = quantile_constants(spec_args["p"])
    n = lengths.size
    total = X.shape[0]

    betas = np.sqrt(spec_args["beta_var"]) * gen.standard_normal((reps, 2))
    zetas = np.sqrt(spec_args["zeta_var"]) * gen.standard_normal((reps, 1))
    sig2 = 1.0 / gen.gamma(c1 / 2.0, 2.0 / d1, size=reps)
    alphas = zetas @ mbar.T + np.sqrt(sig2)[:, None] * gen.standard_normal((reps, n))

    rep_t = np.repeat(np.arange(n), lengths)
    for lo in range(0, reps, 20_000):
        hi = min(lo + 20_000, reps)
        w = gen.exponential(size=(hi - lo, total))
        u = gen.standard_normal((hi - lo, total))
        z = (betas[lo:hi] @ X.T + alphas[lo:hi][:, rep_t]
             + qc.theta * w + np.sqrt(qc.tau_sq * w) * u)
        del w, u, z
    return np.column_stack((betas, zetas, sig2))


def gir_successive_conditional(sweep, spec_args, design, reps, seed, warmup=200):
    """Alternate one posterior sweep with a fresh observation layer.

    The chain's stationary law is the joint prior-predictive distribution, so
    its parameter moments must match the marginal-conditional simulator.
    """
    import bpqr.model as model_mod
    from bpqr import ModelSpec, build_panel, quantile_constants
    from bpqr.model import ChainState

    X, mbar, lengths, starts = design
    n = lengths.size
    qc = quantile_constants(spec_args["p"])
    stream = RngStream(seed)
    gen = stream.gen

    # initial joint draw
    beta = np.sqrt(spec_args["beta_var"]) * gen.standard_normal(2)
    zeta = np.sqrt(spec_args["zeta_var"]) * gen.standard_normal(1)
    sig2 = 1.0 / gen.gamma(spec_args["c1"] / 2.0, 2.0 / spec_args["d1"])
    alpha = mbar @ zeta + np.sqrt(sig2) * gen.standard_normal(n)
    w, z, y = _regen_data(gen, X, mbar, lengths, beta, alpha, zeta, qc)

    ids = np.repeat(np.arange(n), lengths)
    panel = build_panel(ids, y, X[:, 1:], mundlak_cols=[1])
    spec = ModelSpec.with_default_priors(
        spec_args["p"], 2, 1, beta_var=spec_args["beta_var"],
        zeta_var=spec_args["zeta_var"], c1=spec_args["c1"], d1=spec_args["d1"])
    state = ChainState(beta=beta, alpha=alpha, zeta=zeta, sigma_alpha_sq=sig2,
                       z=z, w=w)

    out = np.empty((reps, 4))
    for r in range(-warmup, reps):
        sweep(state, panel, spec, stream)
        w, z, y = _regen_data(gen, X, mbar, lengths, state.beta, state.alpha,
                              state.zeta, qc)
        state.w = w
        state.z = z
        panel.y = y
        if r >= 0:
            out[r] = (state.beta[0], state.beta[1], state.zeta[0],
                      state.sigma_alpha_sq)
    return out
