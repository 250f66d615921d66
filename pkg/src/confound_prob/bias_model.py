"""The confounding bias model and its closed-form posterior.

Model, on the log scale with g = log(Gamma)::

    theta_obs | theta_true, g  ~  Normal(theta_true + g, s^2)
    theta_true                 ~  Normal(0, sigma_theta^2)
    g                          ~  HalfNormal(sigma_gamma)

Integrating theta_true out gives theta_obs | g ~ Normal(g, v) with
v = s^2 + sigma_theta^2. Against the half-normal prior this leaves g a
Normal(m, sigma_post^2) posterior truncated to [0, inf), where::

    m            = theta_obs * sigma_gamma^2 / (v + sigma_gamma^2)
    sigma_post^2 = v * sigma_gamma^2 / (v + sigma_gamma^2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

from . import numerics
from .effect_measures import LogEstimate


class Engine(str, Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE = "quadrature"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class PriorSpec:
    sigma_theta: float = 1.0
    sigma_gamma: float = 0.5

    def __post_init__(self):
        for name in ("sigma_theta", "sigma_gamma"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value!r}")


@dataclass(frozen=True)
class PosteriorParams:
    v: float
    m: float
    sigma_post: float
    lower: float = 0.0


@dataclass(frozen=True)
class CasePosterior:
    p_exceed: float
    gamma_star: float
    mean_log_gamma: float
    mean_theta_true: float
    theta_true_ci: Optional[tuple[float, float]]
    engine: Engine
    p_exceed_se: Optional[float] = None


def posterior_params(le: LogEstimate, prior: PriorSpec) -> PosteriorParams:
    v = le.s**2 + prior.sigma_theta**2
    sg2 = prior.sigma_gamma**2
    m = le.theta_obs * sg2 / (v + sg2)
    sigma_post = math.sqrt(v * sg2 / (v + sg2))
    return PosteriorParams(v=v, m=m, sigma_post=sigma_post)


def p_exceed_closed_form(pp: PosteriorParams, gamma_star: float) -> float:
    """P(Gamma >= gamma_star | theta_obs)."""
    if not gamma_star >= 1.0:
        raise ValueError(f"gamma_star must be >= 1, got {gamma_star!r}")
    if gamma_star == 1.0:
        return 1.0
    return numerics.trunc_normal_tail(pp.m, pp.sigma_post, pp.lower, math.log(gamma_star))


def prior_tail(gamma_star: float, sigma_gamma: float) -> float:
    """Prior P(Gamma >= gamma_star) under the half-normal on log(Gamma)."""
    return 2.0 * numerics.std_normal_sf(math.log(gamma_star) / sigma_gamma)


def posterior_summaries(
    le: LogEstimate,
    prior: PriorSpec,
    pp: PosteriorParams,
    ci_probs: Optional[Sequence[float]] = (0.025, 0.975),
) -> dict:
    """Posterior means of log(Gamma) and theta_true, plus a theta_true interval.

    The mean of theta_true follows from the tower property over
    theta_true | g, theta_obs ~ Normal((theta_obs - g) sigma_theta^2 / v, .).
    The interval has no elementary form and is read off the quadrature
    marginal; pass ``ci_probs=None`` to skip it.
    """
    mean_log_gamma = numerics.trunc_normal_mean(pp.m, pp.sigma_post, pp.lower)
    mean_theta_true = (le.theta_obs - mean_log_gamma) * prior.sigma_theta**2 / pp.v
    ci = None
    if ci_probs is not None:
        from .oracles import theta_true_quantiles

        lo, hi = theta_true_quantiles(le, prior, list(ci_probs))
        ci = (lo, hi)
    return {
        "mean_log_gamma": mean_log_gamma,
        "mean_theta_true": mean_theta_true,
        "theta_true_ci": ci,
    }
