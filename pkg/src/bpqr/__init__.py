"""Bayesian quantile regression for binary panel outcomes with correlated
random effects: Gibbs samplers, distribution primitives, chain diagnostics,
and posterior effect estimators."""

from .diagnostics import (ChainSummary, autocorrelation, geweke_z, hpdi,
                          inefficiency_factor, mcse, summarize)
from .distributions import (QuantileConstants, RngStream, cdf_al,
                            quantile_constants, sample_al, sample_gig_half,
                            sample_invgamma, sample_mvn, sample_truncnorm)
from .effects import (Contrast, EffectResult, average_marginal_effect,
                      odds_ratio, prob_success, relative_risk)
from .errors import BpqrError, ConfigError, DataError, NumericError
from .model import (ChainState, ModelSpec, PanelData, PosteriorDraws,
                    SamplerConfig, build_panel, compute_mundlak_means)
from .sampler_blocked import (omega_inverse, run_chain_blocked, sweep_blocked,
                              update_beta_blocked, update_z_blocked)
from .sampler_nonblocked import run_chain_nonblocked, sweep_nonblocked
from .simgen import SimOutput, SimSpec, generate

__version__ = "0.1.0"

__all__ = [
    "BpqrError", "ConfigError", "DataError", "NumericError",
    "RngStream", "QuantileConstants", "quantile_constants",
    "sample_al", "cdf_al", "sample_truncnorm", "sample_gig_half",
    "sample_invgamma", "sample_mvn",
    "PanelData", "ModelSpec", "ChainState", "SamplerConfig", "PosteriorDraws",
    "build_panel", "compute_mundlak_means",
    "sweep_nonblocked", "run_chain_nonblocked",
    "sweep_blocked", "run_chain_blocked", "update_beta_blocked",
    "update_z_blocked", "omega_inverse",
    "autocorrelation", "inefficiency_factor", "geweke_z", "hpdi", "mcse",
    "summarize", "ChainSummary",
    "Contrast", "EffectResult", "prob_success", "average_marginal_effect",
    "relative_risk", "odds_ratio",
    "SimSpec", "SimOutput", "generate",
    "__version__",
]
