"""Reported associations and their log-scale form."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from .numerics import Z975


class Measure(str, Enum):
    RR = "RR"
    OR = "OR"
    HR = "HR"


class MissingUncertaintyError(ValueError):
    """No CI, no standard error and no fallback standard error."""


class DegenerateIntervalError(ValueError):
    """A confidence interval with identical bounds."""


class RareOutcomeApproximation(UserWarning):
    """An OR or HR is being read on the risk-ratio scale."""


@dataclass(frozen=True)
class EffectEstimate:
    """A ratio-scale association with optional CI and/or log-scale SE.

    When both a CI and ``se_log`` are given, ``se_log`` is used.
    """

    measure: Measure
    point: float
    ci_lower: Optional[float] = None
    ci_upper: Optional[float] = None
    se_log: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "measure", Measure(self.measure))
        if not (math.isfinite(self.point) and self.point > 0):
            raise ValueError(f"point estimate must be a positive finite ratio, got {self.point!r}")
        if (self.ci_lower is None) != (self.ci_upper is None):
            raise ValueError("CI bounds must be given together")
        if self.has_ci:
            if not (self.ci_lower > 0 and self.ci_upper > 0):
                raise ValueError(f"CI bounds must be positive, got ({self.ci_lower}, {self.ci_upper})")
            if not self.ci_lower <= self.point <= self.ci_upper:
                raise ValueError(
                    f"CI ({self.ci_lower}, {self.ci_upper}) does not contain the point {self.point}"
                )
        if self.se_log is not None and not (math.isfinite(self.se_log) and self.se_log > 0):
            raise ValueError(f"se_log must be positive, got {self.se_log!r}")

    @property
    def has_ci(self) -> bool:
        return self.ci_lower is not None

    def normalized(self) -> "EffectEstimate":
        """The same estimate with ratios below one replaced by reciprocals."""
        if self.point >= 1.0:
            return self
        lo = hi = None
        if self.has_ci:
            lo, hi = 1.0 / self.ci_upper, 1.0 / self.ci_lower
        return replace(self, point=1.0 / self.point, ci_lower=lo, ci_upper=hi)


@dataclass(frozen=True)
class LogEstimate:
    theta_obs: float
    s: float
    inverted: bool = False
    se_defaulted: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.s) and self.s > 0):
            raise ValueError(f"standard error must be positive, got {self.s!r}")
        if not math.isfinite(self.theta_obs):
            raise ValueError(f"theta_obs must be finite, got {self.theta_obs!r}")


def se_from_ci(ci_lower: float, ci_upper: float) -> float:
    """Log-scale standard error implied by a symmetric 95% Wald interval."""
    if ci_lower == ci_upper:
        raise DegenerateIntervalError(f"CI bounds coincide at {ci_lower}")
    if not (ci_lower > 0 and ci_upper > 0):
        raise ValueError(f"CI bounds must be positive, got ({ci_lower}, {ci_upper})")
    return abs(math.log(ci_upper) - math.log(ci_lower)) / (2.0 * Z975)


def to_log_estimate(e: EffectEstimate, default_s: Optional[float] = None) -> LogEstimate:
    norm = e.normalized()
    inverted = norm is not e
    defaulted = False
    if e.se_log is not None:
        s = e.se_log
    elif norm.has_ci:
        s = se_from_ci(norm.ci_lower, norm.ci_upper)
    elif default_s is not None:
        if not default_s > 0:
            raise ValueError(f"default_s must be positive, got {default_s!r}")
        s = default_s
        defaulted = True
    else:
        raise MissingUncertaintyError("estimate has neither CI nor se_log and no default_s was given")
    return LogEstimate(math.log(norm.point), s, inverted=inverted, se_defaulted=defaulted)


def measure_as_rr(e: EffectEstimate, warn: bool = True) -> tuple[EffectEstimate, bool]:
    """Re-tag an estimate as a risk ratio.

    Returns the estimate and a flag that is True when an OR or HR was passed
    through unchanged (rare-outcome approximation). A RareOutcomeApproximation
    warning is issued in that case too unless ``warn`` is False.
    """
    if e.measure is Measure.RR:
        return e, False
    if warn:
        warnings.warn(
            f"{e.measure.value} treated as a risk ratio (rare-outcome approximation)",
            RareOutcomeApproximation,
            stacklevel=2,
        )
    return replace(e, measure=Measure.RR), True
