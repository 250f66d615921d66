"""Independent engines for the exceedance probability.

Both engines work from the joint density as the model states it,

    Normal(theta_obs; theta_true + g, s^2) * Normal(theta_true; 0, sigma_theta^2)
        * HalfNormal(g; sigma_gamma),

without using the truncated-normal reduction in :mod:`bias_model`. They exist
to check that reduction and to supply quantiles of theta_true.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .bias_model import PriorSpec
from .effect_measures import LogEstimate
from .numerics import IntegrationError, Interval, RandomSource, simpson_nodes

QUAD_RTOL = 1e-8
GRID_SDS = 10.0
MAX_PANELS = 2**13
_ROW_CHUNK = 256


class UnreliableEstimateError(ArithmeticError):
    """Too little effective weight for the estimate or its standard error."""

    def __init__(self, ess: float, minimum: float, where: str = "overall"):
        super().__init__(f"{where} effective sample size {ess:.1f} is below {minimum:g}")
        self.ess = ess
        self.where = where


class MCEstimate(NamedTuple):
    estimate: float
    std_error: float


def _log_joint(le: LogEstimate, prior: PriorSpec, g: np.ndarray, theta: np.ndarray) -> np.ndarray:
    resid = le.theta_obs - theta[None, :] - g[:, None]
    s, st, sg = le.s, prior.sigma_theta, prior.sigma_gamma
    log_norm = (
        -math.log(s) - math.log(st) - math.log(sg)
        - 1.5 * math.log(2.0 * math.pi) + math.log(2.0)
    )
    return (
        log_norm
        - 0.5 * (resid / s) ** 2
        - 0.5 * (theta[None, :] / st) ** 2
        - 0.5 * (g[:, None] / sg) ** 2
    )


class _Grid:
    """Integration box for one (data, prior, threshold) triple."""

    def __init__(self, le: LogEstimate, prior: PriorSpec, log_threshold: float):
        self.le, self.prior = le, prior
        self.split = log_threshold
        v = le.s**2 + prior.sigma_theta**2
        # posterior of g sits below m + 10 sigma_post, and sigma_post < sigma_gamma
        m = le.theta_obs * prior.sigma_gamma**2 / (v + prior.sigma_gamma**2)
        self.g_max = max(log_threshold, m, 0.0) + GRID_SDS * prior.sigma_gamma
        shrink = prior.sigma_theta**2 / v
        tau = le.s * prior.sigma_theta / math.sqrt(v)
        # theta_true sits near (theta_obs - g) * shrink for each g on the box
        self.theta = Interval(
            (le.theta_obs - self.g_max) * shrink - GRID_SDS * tau,
            max(le.theta_obs, 0.0) * shrink + GRID_SDS * tau,
        )
        self.segments = [Interval(0.0, self.split), Interval(self.split, self.g_max)] if self.split > 0 else [
            Interval(0.0, self.g_max)
        ]
        # coarsest grid must already resolve the narrowest feature on each axis
        ratio = max(self.g_max / min(le.s, prior.sigma_gamma), self.theta.width / tau)
        self.start_panels = max(32, 2 ** math.ceil(math.log2(max(ratio, 1.0))))
        self.start_panels = min(self.start_panels, MAX_PANELS)
        self.shift = None

    def masses(self, n: int) -> tuple[float, float, np.ndarray, np.ndarray]:
        """(mass with g >= split, total mass, theta nodes, theta marginal)."""
        theta, w_theta = simpson_nodes(self.theta, n)
        marginal = np.zeros_like(theta)
        seg_mass = []
        for seg in self.segments:
            g, w_g = simpson_nodes(seg, n)
            if self.shift is None:
                self.shift = float(np.max(_log_joint(self.le, self.prior, g[:: max(1, n // 32)], theta)))
            mass = 0.0
            for start in range(0, g.size, _ROW_CHUNK):
                rows = slice(start, start + _ROW_CHUNK)
                dens = np.exp(_log_joint(self.le, self.prior, g[rows], theta) - self.shift)
                weighted = w_g[rows] @ dens
                marginal += weighted
                mass += float(weighted @ w_theta)
            seg_mass.append(mass)
        if not all(math.isfinite(m) for m in seg_mass):
            raise IntegrationError("non-finite mass on the quadrature grid")
        upper = seg_mass[-1] if self.split > 0 else seg_mass[0]
        return upper, sum(seg_mass), theta, marginal


def p_exceed_quadrature(
    le: LogEstimate, prior: PriorSpec, gamma_star: float, rtol: float = QUAD_RTOL
) -> float:
    """Posterior P(Gamma >= gamma_star) by tensor Simpson over (g, theta_true)."""
    if not gamma_star >= 1.0:
        raise ValueError(f"gamma_star must be >= 1, got {gamma_star!r}")
    if gamma_star == 1.0:
        return 1.0
    grid = _Grid(le, prior, math.log(gamma_star))
    n = grid.start_panels
    upper, total, _, _ = grid.masses(n)
    prev = None
    while n < MAX_PANELS:
        n *= 2
        upper_n, total_n, _, _ = grid.masses(n)
        # Richardson step on Simpson's h^4 error term
        est = (_extrapolate(upper, upper_n), _extrapolate(total, total_n))
        if prev is not None and _close(prev[0], est[0], rtol) and _close(prev[1], est[1], rtol):
            return min(1.0, max(0.0, est[0] / est[1]))
        upper, total, prev = upper_n, total_n, est
    raise IntegrationError(
        f"quadrature did not converge to {rtol:g} with {MAX_PANELS} panels "
        f"(theta_obs={le.theta_obs}, s={le.s}, prior={prior}, gamma_star={gamma_star})"
    )


def _extrapolate(coarse: float, fine: float) -> float:
    return fine + (fine - coarse) / 15.0


def _close(a: float, b: float, rtol: float) -> bool:
    return abs(a - b) <= rtol * abs(b) or a == b


def _invert_cdf(theta: np.ndarray, cdf: np.ndarray, density: np.ndarray, p: float) -> float:
    # bracket [theta[k-1], theta[k]] with cdf[k-1] < p <= cdf[k]
    k = int(np.searchsorted(cdf, p, side="left"))
    k = min(max(k, 1), theta.size - 1)
    if cdf[k] == p:
        return float(theta[k])
    lo, hi = k - 1, k
    # the CDF's slope is the marginal density, known at every node
    spline = CubicHermiteSpline(theta[lo:hi + 1], cdf[lo:hi + 1], density[lo:hi + 1])
    return brentq(lambda t: float(spline(t)) - p, theta[lo], theta[hi], xtol=1e-15)


def _quantiles_on(theta: np.ndarray, marginal: np.ndarray, probs: Sequence[float]) -> list[float]:
    cdf = cumulative_simpson(marginal, x=theta, initial=0.0)
    total = cdf[-1]
    cdf = np.maximum.accumulate(np.clip(cdf / total, 0.0, 1.0))
    density = marginal / total
    return [_invert_cdf(theta, cdf, density, p) for p in probs]


def theta_true_quantiles(
    le: LogEstimate, prior: PriorSpec, probs: Sequence[float], tol: float = 1e-8
) -> list[float]:
    """Quantiles of the posterior marginal of theta_true."""
    probs = [float(p) for p in probs]
    for p in probs:
        if not 0.0 < p < 1.0:
            raise ValueError(f"quantile levels must lie in (0, 1), got {p!r}")
    grid = _Grid(le, prior, 0.0)
    n = grid.start_panels
    _, _, theta, marginal = grid.masses(n)
    q = _quantiles_on(theta, marginal, probs)
    while n < MAX_PANELS:
        n *= 2
        _, _, theta, marginal = grid.masses(n)
        q_n = _quantiles_on(theta, marginal, probs)
        if all(abs(a - b) <= tol * max(1.0, abs(b)) for a, b in zip(q, q_n)):
            return q_n
        q = q_n
    raise IntegrationError(f"theta_true quantiles did not converge with {MAX_PANELS} panels")


def p_exceed_monte_carlo(
    le: LogEstimate,
    prior: PriorSpec,
    gamma_star: float,
    n: int,
    rng: RandomSource,
    min_ess: float = 100.0,
    min_event_ess: float = 10.0,
) -> MCEstimate:
    """Self-normalised importance sampling with the priors as proposal.

    The standard error is the delta-method one,
    sqrt(sum_i wbar_i^2 (1[g_i >= log gamma_star] - p)^2) with normalised
    weights wbar_i.

    Raises UnreliableEstimateError when the overall effective sample size is
    below ``min_ess``, or when the draws on either side of the threshold have
    an effective size below ``min_event_ess``; in the latter regime the
    estimate is dominated by a handful of weights and the standard error
    understates the real error.
    """
    if n < 10_000:
        raise ValueError(f"need at least 10^4 draws, got {n}")
    if not gamma_star >= 1.0:
        raise ValueError(f"gamma_star must be >= 1, got {gamma_star!r}")
    if gamma_star == 1.0:
        return MCEstimate(1.0, 0.0)
    theta = prior.sigma_theta * rng.normal(n)
    g = prior.sigma_gamma * np.abs(rng.normal(n))
    log_w = -0.5 * ((le.theta_obs - theta - g) / le.s) ** 2
    w = np.exp(log_w - log_w.max())
    w /= w.sum()
    ess = 1.0 / float(w @ w)
    if ess < min_ess:
        raise UnreliableEstimateError(ess, min_ess)
    hit = g >= math.log(gamma_star)
    for where, side in (("exceedance", w[hit]), ("complement", w[~hit])):
        side_ess = float(side.sum() ** 2 / (side @ side)) if side.size and side.sum() > 0 else 0.0
        if side_ess < min_event_ess:
            raise UnreliableEstimateError(side_ess, min_event_ess, where)
    p = float(w[hit].sum())
    se = math.sqrt(float((w**2) @ (hit - p) ** 2))
    return MCEstimate(p, se)
