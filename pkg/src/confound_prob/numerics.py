"""Special functions, quadrature and a seeded random source.

Everything here is a pure function of its inputs except :class:`RandomSource`,
which owns mutable counter state and must not be shared between workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

SQRT2 = math.sqrt(2.0)
LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
Z975 = 1.959964  # 97.5% standard normal quantile, as used for CI half-widths

# math.erfc stays normal down to ~1e-308; past this point switch to the
# asymptotic expansion of the Mills ratio.
_ASYMPTOTIC_Z = 30.0


class IntegrationError(ArithmeticError):
    """A quadrature did not converge or hit a non-finite integrand."""


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"interval bounds must be finite, got [{self.lo}, {self.hi}]")
        if not self.lo < self.hi:
            raise ValueError(f"interval requires lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


# ---------------------------------------------------------------------------
# Standard normal
# ---------------------------------------------------------------------------

def std_normal_pdf(z: float) -> float:
    return math.exp(-0.5 * z * z - LOG_SQRT_2PI)


def std_normal_cdf(z: float) -> float:
    """Phi(z) through erfc, so the lower tail keeps full relative precision."""
    return 0.5 * math.erfc(-z / SQRT2)


def std_normal_sf(z: float) -> float:
    """Upper tail 1 - Phi(z), without cancellation."""
    return 0.5 * math.erfc(z / SQRT2)


def log_std_normal_sf(z: float) -> float:
    """log(1 - Phi(z)); finite for every finite z."""
    if z < _ASYMPTOTIC_Z:
        return math.log(0.5 * math.erfc(z / SQRT2))
    # Q(z) = phi(z)/z * (1 - 1/z^2 + 3/z^4 - 15/z^6 + 105/z^8 - ...)
    t = 1.0 / (z * z)
    series = 1.0 - t * (1.0 - 3.0 * t * (1.0 - 5.0 * t * (1.0 - 7.0 * t)))
    return -0.5 * z * z - LOG_SQRT_2PI - math.log(z) + math.log(series)


def std_normal_quantile(p: float) -> float:
    """Inverse of :func:`std_normal_cdf` by bisection.

    The upper half is bisected on the survival function so that values of
    ``p`` close to one do not lose their last digits to ``1 - p``.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile requires 0 < p < 1, got {p!r}")
    if p == 0.5:
        return 0.0
    upper = p > 0.5
    target = 1.0 - p if upper else p
    # search z <= 0 with Phi(z) = target; for the upper half flip the sign
    lo, hi = -40.0, 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if std_normal_cdf(mid) < target:
            lo = mid
        else:
            hi = mid
    z = 0.5 * (lo + hi)
    return -z if upper else z


# ---------------------------------------------------------------------------
# Truncated normal on [lower, inf)
# ---------------------------------------------------------------------------

def _check_sigma(sigma: float) -> None:
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")


def trunc_normal_tail(mu: float, sigma: float, lower: float, threshold: float) -> float:
    """P(X >= threshold | X >= lower) for X ~ Normal(mu, sigma^2)."""
    _check_sigma(sigma)
    if threshold < lower:
        raise ValueError(f"threshold {threshold!r} lies below the truncation point {lower!r}")
    if threshold == lower:
        return 1.0
    a = (threshold - mu) / sigma
    b = (lower - mu) / sigma
    if b <= 0.0:
        # denominator >= 1/2, plain ratio of upper tails is exact enough
        ratio = std_normal_sf(a) / std_normal_sf(b)
    else:
        ratio = math.exp(log_std_normal_sf(a) - log_std_normal_sf(b))
    return min(1.0, max(0.0, ratio))


def inverse_mills(alpha: float) -> float:
    """phi(alpha) / (1 - Phi(alpha)), stable in both tails."""
    if alpha < -10.0:
        return std_normal_pdf(alpha) / std_normal_sf(alpha)
    return math.exp(-0.5 * alpha * alpha - LOG_SQRT_2PI - log_std_normal_sf(alpha))


def trunc_normal_mean(mu: float, sigma: float, lower: float) -> float:
    """E[X | X >= lower] for X ~ Normal(mu, sigma^2)."""
    _check_sigma(sigma)
    alpha = (lower - mu) / sigma
    return mu + sigma * inverse_mills(alpha)


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

def simpson_nodes(bounds: Interval, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the composite Simpson rule with ``n`` panels."""
    if n < 2 or n % 2:
        raise ValueError(f"Simpson's rule needs an even panel count >= 2, got {n!r}")
    x = np.linspace(bounds.lo, bounds.hi, n + 1)
    w = np.empty(n + 1)
    w[0::2] = 2.0
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    w *= (bounds.hi - bounds.lo) / (3.0 * n)
    return x, w


def _evaluate(f: Callable, x: np.ndarray) -> np.ndarray:
    y = np.asarray(f(x), dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape)
    if not np.all(np.isfinite(y)):
        raise IntegrationError("integrand returned a non-finite value")
    return y


def simpson(f: Callable, bounds: Interval, n: int) -> float:
    """Composite Simpson estimate of the integral of a vectorised ``f``."""
    x, w = simpson_nodes(bounds, n)
    return float(w @ _evaluate(f, x))


def integrate_1d(
    f: Callable,
    bounds: Interval,
    n: int = 2,
    rtol: float = 1e-10,
    atol: float = 0.0,
    max_panels: int = 2**20,
    min_panels: int = 8,
) -> float:
    """Simpson's rule with panel doubling until successive estimates agree.

    ``f`` is called on a numpy array of nodes. Raises IntegrationError when
    ``max_panels`` is reached without convergence.
    """
    if n < 2 or n % 2:
        raise ValueError(f"Simpson's rule needs an even panel count >= 2, got {n!r}")
    prev = simpson(f, bounds, n)
    while n < max_panels:
        n *= 2
        cur = simpson(f, bounds, n)
        if n >= min_panels and abs(cur - prev) <= max(rtol * abs(cur), atol):
            return cur
        prev = cur
    raise IntegrationError(
        f"Simpson's rule did not converge on [{bounds.lo}, {bounds.hi}] with {max_panels} panels"
    )


# ---------------------------------------------------------------------------
# Random source
# ---------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB
_SPAWN_SALT = 0xD1B54A32D192ED03


def splitmix64(x: int) -> int:
    """SplitMix64 finaliser on a Python int (the scalar reference)."""
    z = (x + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * _MUL1) & _MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & _MASK64
    return z ^ (z >> 31)


def _splitmix64_block(seed: int, start: int, n: int) -> np.ndarray:
    # output k of the stream is splitmix64(seed + k * GOLDEN); uint64 wraps
    k = np.arange(start, start + n, dtype=np.uint64)
    z = np.uint64(seed) + k * np.uint64(_GOLDEN) + np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MUL1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MUL2)
    return z ^ (z >> np.uint64(31))


class RandomSource:
    """Counter-based SplitMix64 stream.

    Draw ``k`` of the raw stream is ``splitmix64(seed + k * 0x9E3779B97F4A7C15)``
    reduced mod 2**64, so the output depends only on ``(seed, k)``.
    Uniforms take the top 53 bits, ``((x >> 11) + 0.5) / 2**53``, which lies
    strictly inside (0, 1). Normals use Box-Muller on consecutive uniform
    pairs, cosine branch first.
    """

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 <= seed <= _MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
        self.seed = seed
        self.counter = 0

    def __repr__(self):
        return f"RandomSource(seed={self.seed}, counter={self.counter})"

    def raw(self, n: int) -> np.ndarray:
        out = _splitmix64_block(self.seed, self.counter, n)
        self.counter += n
        return out

    def uniform(self, n: int) -> np.ndarray:
        bits = self.raw(n) >> np.uint64(11)
        return (bits.astype(np.float64) + 0.5) * 2.0**-53

    def normal(self, n: int) -> np.ndarray:
        pairs = (n + 1) // 2
        u = self.uniform(2 * pairs).reshape(pairs, 2)
        r = np.sqrt(-2.0 * np.log(u[:, 0]))
        angle = 2.0 * np.pi * u[:, 1]
        z = np.column_stack((r * np.cos(angle), r * np.sin(angle))).ravel()
        return z[:n]

    def spawn(self, key: int) -> "RandomSource":
        """Independent child stream for worker or case ``key``."""
        return RandomSource(splitmix64(self.seed ^ splitmix64((int(key) + _SPAWN_SALT) & _MASK64)))
