import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from confound_prob.numerics import (
    IntegrationError,
    Interval,
    RandomSource,
    integrate_1d,
    simpson,
    splitmix64,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
    std_normal_sf,
    trunc_normal_mean,
    trunc_normal_tail,
)

mpmath.mp.dps = 40


def mp_cdf(z):
    return float(mpmath.ncdf(z))


def mp_sf(z):
    return mpmath.erfc(mpmath.mpf(z) / mpmath.sqrt(2)) / 2


def mp_tail(mu, sigma, lower, threshold):
    # ratio taken at 40 digits; the pieces alone can underflow a double
    num = mp_sf((mpmath.mpf(threshold) - mu) / sigma)
    den = mp_sf((mpmath.mpf(lower) - mu) / sigma)
    return float(num / den)


# --- normal CDF -------------------------------------------------------------

def test_cdf_at_zero():
    assert std_normal_cdf(0.0) == 0.5


@pytest.mark.parametrize("z, expected", [(1.959964, 0.975), (-1.959964, 0.025)])
def test_cdf_against_direct_integration(z, expected):
    # oracle: adaptive integration of the density from -40
    oracle, _ = quad(lambda x: math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi), -40, z,
                     epsabs=1e-13, epsrel=1e-13, limit=200)
    assert std_normal_cdf(z) == pytest.approx(oracle, abs=1e-12)
    assert std_normal_cdf(z) == pytest.approx(expected, abs=1e-6)


def test_cdf_absolute_error_on_grid():
    for z in np.linspace(-8, 8, 321):
        assert abs(std_normal_cdf(z) - mp_cdf(z)) < 1e-12


@pytest.mark.parametrize("z", [-9.0, -15.0, -30.0, -37.0])
def test_cdf_far_lower_tail_keeps_relative_precision(z):
    got = std_normal_cdf(z)
    assert got > 0.0
    assert got == pytest.approx(mp_cdf(z), rel=1e-12)


def test_cdf_symmetry_and_monotonicity():
    zs = np.linspace(-8, 8, 1601)
    vals = [std_normal_cdf(z) for z in zs]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    for z in zs:
        assert abs(std_normal_cdf(z) + std_normal_cdf(-z) - 1.0) <= 1e-14


def test_survival_matches_reflection():
    for z in (-3.0, 0.5, 6.0, 20.0):
        assert std_normal_sf(z) == pytest.approx(std_normal_cdf(-z), rel=1e-14)


# --- quantile ---------------------------------------------------------------

def test_quantile_median():
    assert std_normal_quantile(0.5) == 0.0


@pytest.mark.parametrize("p", [0.975, 0.025, 1e-10, 0.999999])
def test_quantile_against_inverse_erf(p):
    oracle = float(mpmath.sqrt(2) * mpmath.erfinv(2 * mpmath.mpf(p) - 1))
    z = std_normal_quantile(p)
    assert z == pytest.approx(oracle, abs=1e-9)
    assert abs(std_normal_cdf(z) - p) < 1e-10


def test_quantile_975_value():
    assert std_normal_quantile(0.975) == pytest.approx(1.959964, abs=1e-6)
    assert std_normal_quantile(0.025) == pytest.approx(-1.959964, abs=1e-6)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
def test_quantile_domain(p):
    with pytest.raises(ValueError):
        std_normal_quantile(p)


@given(st.floats(-6, 5))
def test_quantile_inverts_cdf(z):
    assert std_normal_quantile(std_normal_cdf(z)) == pytest.approx(z, abs=1e-9)


@given(st.floats(5, 6))
def test_quantile_inverts_cdf_upper_tail(z):
    # Phi(z) near 1 is only resolved to one ulp, so z is resolved to ulp/phi(z)
    bound = 2 * math.ulp(1.0) / std_normal_pdf(z)
    assert abs(std_normal_quantile(std_normal_cdf(z)) - z) <= bound


# --- truncated normal ---------------------------------------------------------

def test_tail_at_truncation_point_is_one():
    assert trunc_normal_tail(0, 1, 0, 0) == 1.0
    assert trunc_normal_tail(3.2, 0.1, -1.0, -1.0) == 1.0


def test_tail_half_normal_against_rejection_sampling():
    expected = 2 * (1 - mp_cdf(1.0))
    assert trunc_normal_tail(0, 1, 0, 1) == pytest.approx(expected, abs=1e-14)
    assert expected == pytest.approx(0.31731, abs=1e-5)
    x = np.random.default_rng(2024).standard_normal(10**7)
    kept = x[x >= 0]
    frac = np.mean(kept >= 1)
    se = math.sqrt(frac * (1 - frac) / kept.size)
    assert abs(trunc_normal_tail(0, 1, 0, 1) - frac) < 4 * se


def test_tail_worked_case():
    got = trunc_normal_tail(0.13752, 0.44766, 0.0, 1.22795)
    assert got == pytest.approx(mp_tail(0.13752, 0.44766, 0.0, 1.22795), rel=1e-12)
    assert got == pytest.approx(0.0120, abs=5e-5)


@pytest.mark.parametrize("mu, sigma, lower, threshold", [
    (0.0, 1.0, 8.0, 9.0),
    (0.0, 1.0, 12.0, 12.5),
    (0.0, 1.0, 40.0, 41.0),
    (-5.0, 0.5, 10.0, 10.01),
    (0.0, 1.0, -50.0, -49.0),
])
def test_tail_stable_when_both_tails_tiny(mu, sigma, lower, threshold):
    got = trunc_normal_tail(mu, sigma, lower, threshold)
    assert 0.0 <= got <= 1.0
    assert got == pytest.approx(mp_tail(mu, sigma, lower, threshold), rel=1e-9)


def test_tail_errors():
    with pytest.raises(ValueError):
        trunc_normal_tail(0, 0, 0, 1)
    with pytest.raises(ValueError):
        trunc_normal_tail(0, -1, 0, 1)
    with pytest.raises(ValueError):
        trunc_normal_tail(0, 1, 1, 0.5)


@given(
    mu=st.floats(-3, 3), sigma=st.floats(0.05, 3), lower=st.floats(-2, 2),
    a=st.floats(0, 5), b=st.floats(0, 5),
)
def test_tail_nonincreasing_in_threshold(mu, sigma, lower, a, b):
    lo, hi = sorted((a, b))
    assert trunc_normal_tail(mu, sigma, lower, lower + hi) <= trunc_normal_tail(mu, sigma, lower, lower + lo)


def test_mean_untruncated():
    assert trunc_normal_mean(0, 1, -1e9) == pytest.approx(0.0, abs=1e-15)


def test_mean_half_normal():
    assert trunc_normal_mean(0, 1, 0) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-14)
    x = np.abs(np.random.default_rng(7).standard_normal(10**7))
    assert abs(trunc_normal_mean(0, 1, 0) - x.mean()) < 4 * x.std() / math.sqrt(x.size)


def test_mean_worked_case():
    mu, sigma = 0.13752, 0.44766
    num = mpmath.quad(lambda x: x * mpmath.npdf(x, mu, sigma), [0, mpmath.inf])
    den = mpmath.quad(lambda x: mpmath.npdf(x, mu, sigma), [0, mpmath.inf])
    got = trunc_normal_mean(mu, sigma, 0)
    assert got == pytest.approx(float(num / den), rel=1e-12)
    assert got == pytest.approx(0.4120, abs=5e-5)


@pytest.mark.parametrize("lower", [5.0, 20.0, 45.0])
def test_mean_deep_truncation(lower):
    # E[X | X >= L] = phi(L) / Q(L), both evaluated at 40 digits
    oracle = mpmath.npdf(lower) / mp_sf(lower)
    assert trunc_normal_mean(0, 1, lower) == pytest.approx(float(oracle), rel=1e-12)


def test_mean_error():
    with pytest.raises(ValueError):
        trunc_normal_mean(0, 0, 0)


# --- quadrature ---------------------------------------------------------------

def test_interval_invariants():
    with pytest.raises(ValueError):
        Interval(1.0, 1.0)
    with pytest.raises(ValueError):
        Interval(0.0, math.inf)
    assert Interval(-1, 2).width == 3


def test_simpson_exact_cases():
    assert simpson(lambda x: np.ones_like(x), Interval(0, 1), 2) == pytest.approx(1.0, abs=1e-15)
    assert simpson(lambda x: x**2, Interval(0, 1), 2) == pytest.approx(1 / 3, abs=1e-15)
    assert simpson(lambda x: x**3 - x, Interval(-1, 2), 2) == pytest.approx(2.25, abs=1e-14)


def test_simpson_accepts_scalar_integrand():
    assert simpson(lambda x: 2.0, Interval(0, 3), 4) == pytest.approx(6.0)


@pytest.mark.parametrize("n", [0, 1, 3, 7])
def test_simpson_panel_count(n):
    with pytest.raises(ValueError):
        simpson(lambda x: x, Interval(0, 1), n)


def test_integrate_normal_density():
    f = lambda x: np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
    assert integrate_1d(f, Interval(-8, 8)) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_integrate_non_finite():
    with pytest.raises(IntegrationError):
        integrate_1d(lambda x: 1.0 / x, Interval(-1, 1))


def test_integrate_cap():
    with pytest.raises(IntegrationError):
        integrate_1d(lambda x: np.sin(1 / (x + 1e-3)), Interval(0, 1), max_panels=64)


def test_pdf_value():
    assert std_normal_pdf(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi))


# --- random source ------------------------------------------------------------

def test_splitmix_reference_vector():
    # first outputs of SplitMix64 seeded with 0
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    assert [int(x) for x in RandomSource(0).raw(3)] == [
        splitmix64(0), splitmix64(0x9E3779B97F4A7C15), splitmix64((2 * 0x9E3779B97F4A7C15) % 2**64)
    ]


def test_same_seed_same_stream():
    a, b = RandomSource(42), RandomSource(42)
    assert np.array_equal(a.normal(1001), b.normal(1001))
    assert np.array_equal(a.uniform(17), b.uniform(17))


def test_stream_is_split_invariant():
    a, b = RandomSource(9), RandomSource(9)
    whole = a.raw(100)
    parts = np.concatenate([b.raw(30), b.raw(70)])
    assert np.array_equal(whole, parts)


def test_uniform_open_interval_and_moments():
    u = RandomSource(5).uniform(10**6)
    assert u.min() > 0 and u.max() < 1
    assert abs(u.mean() - 0.5) < 5 * math.sqrt(1 / 12 / u.size)


def test_normal_moments():
    z = RandomSource(11).normal(10**6)
    assert abs(z.mean()) < 5e-3
    assert abs(z.var() - 1) < 1e-2
    assert abs(np.mean(z > 1.959964) - 0.025) < 1e-3


def test_spawn_deterministic_and_distinct():
    root = RandomSource(3)
    assert root.spawn(4).seed == RandomSource(3).spawn(4).seed
    seeds = {root.spawn(i).seed for i in range(100)}
    assert len(seeds) == 100
    assert not np.array_equal(root.spawn(0).raw(8), root.spawn(1).raw(8))


def test_seed_range():
    with pytest.raises(ValueError):
        RandomSource(-1)
    with pytest.raises(ValueError):
        RandomSource(2**64)
    RandomSource(2**64 - 1).normal(3)
