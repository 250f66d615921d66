"""Cross-checks of the closed form against the quadrature and Monte Carlo engines."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .bias_model import PriorSpec, p_exceed_closed_form, posterior_params
from .effect_measures import LogEstimate
from .numerics import RandomSource
from .oracles import UnreliableEstimateError, p_exceed_monte_carlo, p_exceed_quadrature

DEFAULT_SEED = 12345
QUAD_TOL = 1e-6
MC_SIGMAS = 3.0

# (name, lo, hi) for each coordinate of a grid tuple
GRID_RANGES = (
    ("theta_obs", 0.0, 3.0),
    ("s", 0.05, 1.0),
    ("sigma_theta", 0.25, 2.0),
    ("sigma_gamma", 0.1, 2.0),
    ("gamma_star", 1.0, 10.0),
)


@dataclass(frozen=True)
class GridPoint:
    theta_obs: float
    s: float
    sigma_theta: float
    sigma_gamma: float
    gamma_star: float

    @property
    def log_estimate(self) -> LogEstimate:
        return LogEstimate(self.theta_obs, self.s)

    @property
    def prior(self) -> PriorSpec:
        return PriorSpec(self.sigma_theta, self.sigma_gamma)


def random_grid(n: int, seed: int = DEFAULT_SEED) -> list[GridPoint]:
    """``n`` parameter tuples drawn uniformly from GRID_RANGES."""
    u = RandomSource(seed).uniform(n * len(GRID_RANGES)).reshape(n, len(GRID_RANGES))
    return [
        GridPoint(*(lo + (hi - lo) * float(x) for (_, lo, hi), x in zip(GRID_RANGES, row)))
        for row in u
    ]


@dataclass
class MCCheck:
    point: GridPoint
    closed: float
    estimate: Optional[float]
    std_error: Optional[float]
    error: Optional[str] = None

    @property
    def within(self) -> bool:
        if self.estimate is None:
            return False
        return abs(self.closed - self.estimate) < MC_SIGMAS * self.std_error or self.closed == self.estimate


@dataclass
class VerifyReport:
    grid_size: int
    max_quad_diff: float
    worst_quad_point: Optional[GridPoint]
    mc_checks: list[MCCheck] = field(default_factory=list)

    @property
    def quad_ok(self) -> bool:
        return self.max_quad_diff < QUAD_TOL

    @property
    def mc_compared(self) -> list[MCCheck]:
        """Checks where the Monte Carlo engine accepted its own estimate."""
        return [m for m in self.mc_checks if m.estimate is not None]

    @property
    def mc_unreliable(self) -> list[MCCheck]:
        return [m for m in self.mc_checks if m.estimate is None]

    @property
    def mc_allowed_misses(self) -> int:
        return len(self.mc_compared) // 25

    @property
    def mc_misses(self) -> list[MCCheck]:
        return [m for m in self.mc_compared if not m.within]

    @property
    def mc_ok(self) -> bool:
        """At most one miss per 25 compared tuples, and something was compared.

        Vacuously true when no Monte Carlo checks were requested.
        """
        if not self.mc_checks:
            return True
        return bool(self.mc_compared) and len(self.mc_misses) <= self.mc_allowed_misses

    @property
    def passed(self) -> bool:
        return self.quad_ok and self.mc_ok


def verify_engines(
    grid_size: int = 100,
    seed: int = DEFAULT_SEED,
    mc_points: Optional[int] = None,
    mc_draws: int = 10**6,
    closed_form_bias: float = 0.0,
) -> VerifyReport:
    """Compare engines on a random grid.

    The first ``mc_points`` tuples (default a quarter of the grid, at least
    one) are also checked against Monte Carlo. ``closed_form_bias`` is added
    to every closed-form value; it exists to exercise the failure path.
    """
    grid = random_grid(grid_size, seed)
    if mc_points is None:
        mc_points = max(1, math.ceil(grid_size / 4))
    root = RandomSource(seed)
    max_diff, worst = 0.0, None
    report = VerifyReport(grid_size, 0.0, None)
    for i, pt in enumerate(grid):
        le, prior = pt.log_estimate, pt.prior
        closed = p_exceed_closed_form(posterior_params(le, prior), pt.gamma_star) + closed_form_bias
        diff = abs(closed - p_exceed_quadrature(le, prior, pt.gamma_star))
        if diff >= max_diff:
            max_diff, worst = diff, pt
        if i < mc_points:
            try:
                est = p_exceed_monte_carlo(le, prior, pt.gamma_star, mc_draws, root.spawn(i))
                report.mc_checks.append(MCCheck(pt, closed, est.estimate, est.std_error))
            except UnreliableEstimateError as exc:
                report.mc_checks.append(MCCheck(pt, closed, None, None, str(exc)))
    report.max_quad_diff, report.worst_quad_point = max_diff, worst
    return report
