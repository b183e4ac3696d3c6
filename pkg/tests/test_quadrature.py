import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from duffinglab.errors import PrecisionFailureError
from duffinglab.quadrature import (
    CumulativeIntegral,
    even_circle_mean,
    gl_panel,
    periodic_mean,
    periodic_sum_mean,
    simpson_integral,
)

TWO_PI = 2.0 * math.pi


def test_periodic_mean_trig_identities():
    value, nodes = periodic_mean(lambda u: np.cos(u) ** 2, rel_tol=1e-12)
    assert value == pytest.approx(0.5, rel=1e-12)
    assert nodes >= 128
    value, _ = periodic_mean(lambda u: np.sin(3 * u) + 2.0, rel_tol=1e-12)
    assert value == pytest.approx(2.0, rel=1e-12)


def test_periodic_mean_smooth_nontrivial():
    # mean of exp(cos u) over the circle is I_0(1) (modified Bessel)
    import mpmath
    expected = float(mpmath.besseli(0, 1))
    value, _ = periodic_mean(lambda u: np.exp(np.cos(u)), rel_tol=1e-13)
    assert value == pytest.approx(expected, rel=1e-12)


def test_even_circle_mean_matches_full_circle():
    # F(cos u) with F(v) = exp(-v^2): compare the folded evaluation
    # against a brute-force full-circle mean
    f_even = lambda u: np.exp(-np.cos(u) ** 2)
    folded, nodes = even_circle_mean(f_even, rel_tol=1e-12)
    us = np.arange(1 << 16) * (TWO_PI / (1 << 16))
    brute = float(np.mean(np.exp(-np.cos(us) ** 2)))
    assert folded == pytest.approx(brute, rel=1e-11)
    assert nodes % 4 == 0


def test_tolerance_argument_required():
    with pytest.raises(ValueError):
        periodic_mean(lambda u: np.cos(u))
    with pytest.raises(ValueError):
        even_circle_mean(lambda u: np.cos(u))


def test_node_cap_precision_failure():
    # a kink the trapezoid ladder cannot resolve to 1e-13 by 512 nodes
    f = lambda u: np.abs(np.cos(u))
    with pytest.raises(PrecisionFailureError):
        periodic_mean(f, rel_tol=1e-13, n_cap=512)


def test_abs_tol_accepts_when_rel_cannot():
    f = lambda u: np.abs(np.cos(u))
    value, _ = periodic_mean(f, rel_tol=1e-16, abs_tol=1e-6, n_cap=1 << 18)
    assert value == pytest.approx(2.0 / math.pi, abs=1e-5)


def test_periodic_sum_mean_spectral_exactness():
    # uniform sums are exact for harmonics below the node count
    f = lambda u: 1.5 + np.cos(5 * u) + np.sin(7 * u)
    assert periodic_sum_mean(f, 64) == pytest.approx(1.5, abs=1e-15)


def test_gl_panel_polynomial_exactness():
    # 16-point Gauss-Legendre integrates degree-31 polynomials exactly
    f = lambda x: x ** 31 + 3.0 * x ** 10
    exact = (2.0 ** 32 - 1.0) / 32.0 + 3.0 * (2.0 ** 11 - 1.0) / 11.0
    assert gl_panel(f, 1.0, 2.0) == pytest.approx(exact, rel=1e-14)


@given(st.floats(min_value=0.0, max_value=TWO_PI))
def test_cumulative_integral_matches_closed_form(theta):
    F = CumulativeIntegral(np.sin, 64)
    assert F(theta) == pytest.approx(1.0 - math.cos(theta), abs=1e-13)


def test_cumulative_integral_full_turn_and_beyond():
    F = CumulativeIntegral(lambda u: np.cos(u) ** 2, 128)
    assert F(TWO_PI) == pytest.approx(math.pi, rel=1e-13)
    assert F(TWO_PI + 0.5) == pytest.approx(
        math.pi + 0.25 + 0.25 * math.sin(1.0), rel=1e-12)
    assert F(-0.3) == pytest.approx(-(0.15 - 0.25 * math.sin(-0.6)), rel=1e-10)
    assert F(0.0) == 0.0


def test_simpson_integral_convergence():
    # fourth order: doubling the panel count gains ~16x
    exact = math.exp(1.0) - 1.0
    coarse = simpson_integral(np.exp, 0.0, 1.0, 4)
    fine = simpson_integral(np.exp, 0.0, 1.0, 8)
    assert abs(fine - exact) < abs(coarse - exact) / 12.0
    assert fine == pytest.approx(exact, rel=1e-6)
