"""Effect functionals against closed forms and a brute-force triple loop."""

import numpy as np
import pytest

from bpqr import (ConfigError, Contrast, PosteriorDraws, average_marginal_effect,
                  cdf_al, odds_ratio, prob_success, relative_risk)
from helpers import random_panel


def _fake_draws(gen, panel, m, p):
    k, q, n = panel.k, panel.q, panel.n
    return PosteriorDraws(
        beta=gen.normal(0.0, 0.8, (m, k)),
        zeta=gen.normal(0.0, 0.5, (m, q)),
        sigma_alpha_sq=gen.uniform(0.5, 1.5, m),
        alpha=gen.normal(0.0, 0.7, (m, n)),
        beta_names=[f"beta_{j + 1}" for j in range(k)],
        zeta_names=[f"zeta_{j}" for j in range(q)],
        meta={"p": p},
    )


def _brute_force(draws, panel, contrast, p, kind):
    """Triple loop over (i, t, m) through scalar prob_success calls."""
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


def test_prob_success_examples():
    # index 0 gives 1 - p; index 1 at the median gives 1 - 0.5 e^{-0.5}
    assert prob_success(np.array([0.0]), np.array([1.0]), 0.0, 0.25) == \
        pytest.approx(0.75, abs=1e-15)
    val = prob_success(np.array([1.0]), np.array([1.0]), 0.0, 0.5)
    assert val == pytest.approx(1.0 - 0.5 * np.exp(-0.5), abs=1e-12)
    assert val == pytest.approx(0.696735, abs=1e-6)
    assert prob_success(np.array([1.0]), np.array([500.0]), 0.0, 0.5) == \
        pytest.approx(1.0, abs=1e-12)


def test_prob_success_monotone_in_index():
    idx = np.linspace(-30, 30, 500)
    for p in (0.2, 0.5, 0.9):
        vals = [prob_success(np.array([v]), np.array([1.0]), 0.0, p) for v in idx]
        assert np.all(np.diff(vals) >= 0.0)


def test_single_point_closed_forms():
    # one row, one draw: beta_j = 1, everything else zero, a=0 -> b=1, p=0.5
    panel = random_panel(80, n=1, t_min=1, t_max=1, k=2)
    panel.X[:, 1] = 0.0
    draws = PosteriorDraws(beta=np.array([[0.0, 1.0]]),
                           zeta=np.zeros((1, 1)), sigma_alpha_sq=np.ones(1),
                           alpha=np.zeros((1, 1)),
                           beta_names=["beta_1", "beta_2"],
                           zeta_names=["zeta_x2"], meta={"p": 0.5})
    contrast = Contrast(col=1, a=0.0, b=1.0)
    ame = average_marginal_effect(draws, panel, contrast)
    rr = relative_risk(draws, panel, contrast)
    orr = odds_ratio(draws, panel, contrast)
    assert ame.mean == pytest.approx(0.196735, abs=1e-6)
    assert rr.mean == pytest.approx(1.39347, abs=1e-5)
    assert orr.mean == pytest.approx(2.29745, abs=1e-5)


def test_zero_contrast_is_exact_identity():
    gen = np.random.default_rng(81)
    panel = random_panel(82, n=4, t_min=1, t_max=3, k=3)
    draws = _fake_draws(gen, panel, 12, 0.25)
    contrast = Contrast(col=2, a=0.7, b=0.7)
    assert average_marginal_effect(draws, panel, contrast).mean == 0.0
    assert relative_risk(draws, panel, contrast).mean == 1.0
    assert odds_ratio(draws, panel, contrast).mean == 1.0


def test_ame_antisymmetry():
    gen = np.random.default_rng(83)
    panel = random_panel(84, n=5, t_min=2, t_max=3, k=3)
    draws = _fake_draws(gen, panel, 15, 0.75)
    fwd = average_marginal_effect(draws, panel, Contrast(col=1, a=-0.3, b=0.9))
    rev = average_marginal_effect(draws, panel, Contrast(col=1, a=0.9, b=-0.3))
    assert fwd.mean == -rev.mean
    assert np.array_equal(fwd.values, -rev.values)


def test_pointwise_ratio_reciprocal():
    # per (i, t, m): ratio(b/a) * ratio(a/b) = 1 even though the averaged
    # quantities are not reciprocals
    gen = np.random.default_rng(85)
    p = 0.4
    idx_a = gen.normal(0, 2, 500)
    idx_b = idx_a + gen.normal(0, 1, 500)
    ha = 1.0 - cdf_al(-idx_a, 0.0, 1.0, p)
    hb = 1.0 - cdf_al(-idx_b, 0.0, 1.0, p)
    prod = (hb / ha) * (ha / hb)
    assert np.allclose(prod, 1.0, atol=1e-12)


@pytest.mark.parametrize("kind,fn", [("ame", average_marginal_effect),
                                     ("rr", relative_risk),
                                     ("or", odds_ratio)])
def test_matches_brute_force_small_instance(kind, fn):
    gen = np.random.default_rng(86)
    panel = random_panel(87, n=5, t_min=2, t_max=2, k=3)
    draws = _fake_draws(gen, panel, 3, 0.5)
    contrast = Contrast(col=2, a=-0.5, b=1.2)
    res = fn(draws, panel, contrast)
    brute = _brute_force(draws, panel, contrast, 0.5, kind)
    assert res.mean == pytest.approx(brute, abs=1e-12)


def test_matches_brute_force_many_random_instances():
    gen = np.random.default_rng(88)
    for trial in range(100):
        panel = random_panel(1000 + trial, n=int(gen.integers(1, 5)),
                             t_min=1, t_max=3, k=int(gen.integers(2, 5)))
        p = float(gen.uniform(0.1, 0.9))
        draws = _fake_draws(gen, panel, int(gen.integers(1, 4)), p)
        col = int(gen.integers(1, panel.k))
        contrast = Contrast(col=col, a=float(gen.normal()), b=float(gen.normal()))
        for kind, fn in (("ame", average_marginal_effect),
                         ("rr", relative_risk), ("or", odds_ratio)):
            res = fn(draws, panel, contrast, p)
            brute = _brute_force(draws, panel, contrast, p, kind)
            assert res.mean == pytest.approx(brute, abs=1e-12), (trial, kind)


def test_rare_event_or_close_to_rr():
    # success probability below 1% at both covariate values
    gen = np.random.default_rng(89)
    panel = random_panel(90, n=10, t_min=2, t_max=4, k=3)
    panel.X[:, 1:] *= 0.05
    m, n = 40, panel.n
    draws = PosteriorDraws(
        beta=np.column_stack((np.full(m, -9.0),
                              gen.normal(0.3, 0.05, (m, panel.k - 1)))),
        zeta=gen.normal(0, 0.1, (m, panel.q)),
        sigma_alpha_sq=np.ones(m),
        alpha=gen.normal(0.0, 0.05, (m, n)),
        beta_names=[f"beta_{j+1}" for j in range(panel.k)],
        zeta_names=[f"zeta_{j}" for j in range(panel.q)],
        meta={"p": 0.5})
    contrast = Contrast(col=1, a=0.0, b=1.0)
    rr = relative_risk(draws, panel, contrast)
    orr = odds_ratio(draws, panel, contrast)
    # verify the regime is actually rare
    probs = [prob_success(panel.X[r], draws.beta[m_], draws.alpha[m_, 0], 0.5)
             for m_ in range(3) for r in range(3)]
    assert max(probs) < 0.01
    assert abs(orr.mean - rr.mean) / rr.mean < 0.02


def test_missing_alpha_draws_is_config_error():
    gen = np.random.default_rng(91)
    panel = random_panel(92, n=3, t_min=1, t_max=2, k=2)
    draws = _fake_draws(gen, panel, 5, 0.5)
    draws = PosteriorDraws(beta=draws.beta, zeta=draws.zeta,
                           sigma_alpha_sq=draws.sigma_alpha_sq, alpha=None,
                           beta_names=draws.beta_names,
                           zeta_names=draws.zeta_names, meta=draws.meta)
    with pytest.raises(ConfigError):
        average_marginal_effect(draws, panel, Contrast(col=1, a=0.0, b=1.0))


def test_intercept_contrast_rejected():
    with pytest.raises(ConfigError):
        Contrast(col=0, a=0.0, b=1.0)


def test_effect_result_summaries():
    gen = np.random.default_rng(93)
    panel = random_panel(94, n=6, t_min=1, t_max=3, k=3)
    draws = _fake_draws(gen, panel, 60, 0.25)
    res = average_marginal_effect(draws, panel, Contrast(col=1, a=0.0, b=1.0))
    assert res.values.shape == (60,)
    assert res.mean == pytest.approx(res.values.mean())
    assert res.hpdi_lo <= res.mean <= res.hpdi_hi
    assert np.all(np.abs(res.values) <= 1.0)
