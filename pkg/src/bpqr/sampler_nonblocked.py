"""Single-site Gibbs sampler: each parameter drawn from its full conditional.

Sweep order is beta, alpha, w, sigma_alpha^2, zeta, z. Simple but prone to
high autocorrelation, because alpha is conditioned on both beta and z.
"""

from __future__ import annotations

from typing import Optional

from .distributions import RngStream
from .model import (ChainState, ModelSpec, PanelData, PosteriorDraws,
                    SamplerConfig, run_chain, update_alpha,
                    update_beta_nonblocked, update_sigma_alpha, update_w,
                    update_z_nonblocked, update_zeta)


def sweep_nonblocked(state: ChainState, data: PanelData, spec: ModelSpec,
                     rng: RngStream) -> ChainState:
    """One full Gibbs scan, mutating ``state`` in place."""
    state.beta = update_beta_nonblocked(state, data, spec, rng)
    state.alpha = update_alpha(state, data, spec, rng)
    state.w = update_w(state, data, spec, rng)
    state.sigma_alpha_sq = update_sigma_alpha(state, data, spec, rng)
    state.zeta = update_zeta(state, data, spec, rng)
    state.z = update_z_nonblocked(state, data, spec, rng)
    return state


def run_chain_nonblocked(data: PanelData, spec: ModelSpec, config: SamplerConfig,
                         rng: Optional[RngStream] = None) -> PosteriorDraws:
    """Run the single-site chain and collect thinned post-burn-in draws."""
    return run_chain(data, spec, config, rng, sweep_nonblocked)
