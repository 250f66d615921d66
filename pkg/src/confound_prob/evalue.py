"""E-values on the risk-ratio scale and their inverse."""

from __future__ import annotations

import math

from .effect_measures import EffectEstimate


class MissingCIError(ValueError):
    pass


def evalue_from_ratio(rr: float) -> float:
    """Point E-value ``r + sqrt(r (r - 1))`` of the direction-normalised ratio."""
    if not (rr > 0 and math.isfinite(rr)):
        raise ValueError(f"ratio must be positive and finite, got {rr!r}")
    r = rr if rr >= 1.0 else 1.0 / rr
    if r == 1.0:
        return 1.0
    return r + math.sqrt(r * (r - 1.0))


def ratio_from_evalue(ev: float) -> float:
    """The ratio r >= 1 whose E-value is ``ev``: r = E^2 / (2E - 1)."""
    if not (ev >= 1.0 and math.isfinite(ev)):
        raise ValueError(f"E-value must be >= 1, got {ev!r}")
    return ev * ev / (2.0 * ev - 1.0)


def evalue_for_ci_limit(e: EffectEstimate) -> float:
    """E-value of the CI limit nearest the null; 1 when the CI covers 1."""
    if not e.has_ci:
        raise MissingCIError("E-value for the CI limit needs a confidence interval")
    norm = e.normalized()
    if norm.ci_lower <= 1.0:
        return 1.0
    return evalue_from_ratio(norm.ci_lower)
