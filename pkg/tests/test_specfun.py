import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from bessel_heat import specfun
from bessel_heat.errors import (BesselOverflowError, DomainError, PrecisionLossError,
                                SeriesBudgetExceeded)


# --- types ---------------------------------------------------------------------

def test_bessel_index_t0():
    assert specfun.BesselIndex(0.3).t0 == 1.0
    assert specfun.BesselIndex(-0.5).t0 == 1.0
    assert specfun.BesselIndex(2.0).t0 == 8.0 / 15.0
    assert specfun.BesselIndex(-1.0).abs_mu == 1.0
    for mu in np.linspace(-4, 4, 33):
        assert specfun.BesselIndex(mu).t0 > 0


def test_series_control_validation():
    with pytest.raises(DomainError):
        specfun.SeriesControl(rel_tol=0.0)
    with pytest.raises(DomainError):
        specfun.SeriesControl(max_terms=0)
    assert specfun.SeriesControl().switch_for(2.0) == 34.0


# --- I_mu -------------------------------------------------------------------------

def test_series_small_argument():
    assert specfun.bessel_i_series(0.0, 1e-8) == pytest.approx(1.0, rel=1e-15, abs=0)


def test_series_half_integer_closed_form():
    got = specfun.bessel_i_series(0.5, 1.0)
    assert got == pytest.approx(math.sqrt(2 / math.pi) * math.sinh(1.0), rel=1e-15)


def test_series_power_law_at_zero():
    ratios = [specfun.bessel_i_series(0.3, z) / (z**0.3 / (2**0.3 * math.gamma(1.3)))
              for z in (1e-2, 1e-4, 1e-6)]
    assert abs(ratios[-1] - 1.0) < 1e-11
    assert abs(ratios[0] - 1.0) > abs(ratios[1] - 1.0) > abs(ratios[2] - 1.0)


def test_series_budget():
    with pytest.raises(SeriesBudgetExceeded) as info:
        specfun.bessel_i_series(0.0, 50.0, specfun.SeriesControl(max_terms=3))
    assert info.value.partial_sum > 0
    assert info.value.last_term > 0


def test_series_negative_orders_match_scipy():
    for mu in (-0.3, -0.7, -1.5, -2.0, -3.0):
        for z in (0.5, 3.0, 12.0):
            assert specfun.bessel_i_series(mu, z) == pytest.approx(special.iv(mu, z), rel=1e-12)


def test_asym_half_order_is_exact():
    value, scale = specfun.bessel_i_asym(0.5, 50.0, 4)
    assert value == math.exp(50.0) / math.sqrt(100 * math.pi)
    assert scale == 0.0


def test_asym_mu0_two_terms():
    value, _ = specfun.bessel_i_asym(0.0, 30.0, 2)
    expected = math.exp(30.0) / math.sqrt(60 * math.pi) * (1 + 1 / (8 * 30))
    assert value == pytest.approx(expected, rel=1e-15)


def test_asym_mu1_against_series():
    value, scale = specfun.bessel_i_asym(1.0, 40.0, 3)
    series = specfun.bessel_i_series(1.0, 40.0)
    assert abs(value / series - 1) <= 2 * abs(specfun.coeff_c(1.0, 3)) / 40**3
    assert scale == pytest.approx(abs(specfun.coeff_c(1.0, 3)) / 40**3)


def test_asym_overflow_and_log_twin():
    with pytest.raises(BesselOverflowError):
        specfun.bessel_i_asym(0.0, 800.0, 2)
    log_v, _ = specfun.log_bessel_i_asym(0.0, 800.0, 2)
    assert log_v == pytest.approx(800 - 0.5 * math.log(1600 * math.pi) + math.log1p(1 / 6400))
    with pytest.raises(BesselOverflowError):
        specfun.bessel_i(0.0, 800.0)
    assert specfun.log_bessel_i(0.0, 800.0) == pytest.approx(float(mpmath.log(mpmath.besseli(0, 800))),
                                                             rel=1e-15)


def test_dispatcher_examples():
    assert specfun.bessel_i(0.0, 1e-12) == pytest.approx(1.0, rel=1e-12)
    assert specfun.bessel_i(0.5, 2.0) == pytest.approx(math.sqrt(1 / math.pi) * math.sinh(2.0), rel=1e-14)
    series = specfun.bessel_i_series(0.0, 35.0)
    assert abs(specfun.bessel_i(0.0, 35.0) / series - 1) <= 1e-12


@pytest.mark.parametrize("mu", [0.0, 0.5, 1.0, 2.5, 5.0])
def test_branch_continuity(mu):
    sw = 30 + mu * mu
    # Same argument through both branches, and the dispatcher either side of the switch.
    series = specfun.bessel_i_series(mu, sw)
    assert abs(specfun.bessel_i(mu, sw) / series - 1) <= 1e-12
    below = specfun.bessel_i_scaled(mu, sw * (1 - 1e-15))
    assert abs(specfun.bessel_i_scaled(mu, sw) / below - 1) <= 1e-12


@pytest.mark.parametrize("mu", [0.0, 0.3, 0.5, -0.5, 1.0, 2.7, 7.5])
def test_scaled_i_against_scipy(mu):
    z = np.geomspace(1e-3, 1e3, 61)
    ours = np.array([specfun.bessel_i_scaled(mu, v) for v in z])
    np.testing.assert_allclose(ours, special.ive(mu, z), rtol=5e-14)
    np.testing.assert_allclose(specfun.bessel_i_scaled_array(mu, z), special.ive(mu, z), rtol=5e-14)


def test_large_order_against_mpmath():
    for mu, z in ((9.5, 4.0), (10.0, 60.0), (3.2, 130.0)):
        expected = float(mpmath.besseli(mu, z) * mpmath.exp(-z))
        assert specfun.bessel_i_scaled(mu, z) == pytest.approx(expected, rel=1e-13)


@settings(max_examples=200, deadline=None)
@given(mu=st.floats(0, 5), x=st.floats(1e-3, 200), y=st.floats(1e-3, 200))
def test_monotone_in_argument(mu, x, y):
    x, y = min(x, y), max(x, y)
    assert specfun.log_bessel_i(mu, x) <= specfun.log_bessel_i(mu, y) + 1e-15 * abs(specfun.log_bessel_i(mu, y))


@settings(max_examples=200, deadline=None)
@given(mu=st.floats(0.5, 5), x=st.floats(1e-2, 100), y=st.floats(1e-2, 100))
def test_laforgia_sandwich(mu, x, y):
    x, y = min(x, y), max(x, y)
    log_ratio = specfun.log_bessel_i(mu, y) - specfun.log_bessel_i(mu, x)
    slack = 1e-12 * (1 + abs(log_ratio))
    assert mu * math.log(x / y) + y - x - slack <= log_ratio <= mu * math.log(y / x) + y - x + slack


@settings(max_examples=100, deadline=None)
@given(mu=st.floats(-0.499, 0.499), x=st.floats(1e-2, 100), y=st.floats(1e-2, 100))
def test_laforgia_upper_only_below_half(mu, x, y):
    x, y = min(x, y), max(x, y)
    log_ratio = specfun.log_bessel_i(mu, y) - specfun.log_bessel_i(mu, x)
    assert log_ratio <= mu * math.log(y / x) + y - x + 1e-12 * (1 + abs(log_ratio))


# --- coefficients -----------------------------------------------------------------

def test_coeff_examples():
    assert specfun.coeff_c(0.7, 0) == 0
    assert all(specfun.coeff_c(0.5, k) == 0 for k in range(1, 12))
    assert specfun.coeff_c(Fraction(1), 2) == Fraction(-15, 128)
    assert specfun.coeff_c(1.0, 2) == -15 / 128


def test_coeff_recurrence_exact():
    for mu in (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3, 2)):
        for k in range(2, 11):
            assert specfun.coeff_c(mu, k) * 8 * k == specfun.coeff_c(mu, k - 1) * (4 * mu * mu - (2 * k - 1) ** 2)


def test_coeff_direct_product():
    mu = Fraction(7, 3)
    for k in range(1, 9):
        prod = Fraction(1)
        for j in range(1, k + 1):
            prod *= 4 * mu * mu - (2 * j - 1) ** 2
        assert specfun.coeff_c(mu, k) == prod / (8**k * math.factorial(k))


@pytest.mark.parametrize("mu", [0.0, 0.5, 1.3, -2.0, 3.0])
def test_asymptotic_remainder_property(mu):
    ctl = specfun.SeriesControl(asym_switch=1e9, max_terms=3000)
    for z in (30.0, 60.0, 150.0):
        series = specfun.bessel_i_series(mu, z, ctl)
        for n in (1, 2, 3, 4):
            asym, _ = specfun.bessel_i_asym(mu, z, n)
            bound = 2 * abs(specfun.coeff_c(mu, n)) / z**n * math.exp(z) / math.sqrt(2 * math.pi * z)
            assert abs(series - asym) <= bound + 1e-14 * series


# --- K_mu -------------------------------------------------------------------------

def test_k_half():
    assert specfun.bessel_k(0.5, 1.0) == pytest.approx(math.sqrt(math.pi / 2) * math.exp(-1), rel=1e-14)


def test_k_even_in_order():
    for z in (0.2, 3.0, 40.0):
        assert specfun.bessel_k(0.3, z) == specfun.bessel_k(-0.3, z)


def test_k_integral_identity():
    from bessel_heat import quadrature

    assert quadrature.integrate_k_family(1.0, 1.0, 1.0) == pytest.approx(2 * specfun.bessel_k(1.0, 2.0), rel=1e-8)


@pytest.mark.parametrize("mu", [0.0, 0.02, 0.3, 0.97, 1.0, 1.5, 2.0, 2.7, 3.0])
def test_k_against_scipy(mu):
    z = np.geomspace(1e-2, 50, 40)
    ours = np.array([specfun.bessel_k(mu, v) for v in z])
    np.testing.assert_allclose(ours, special.kv(mu, z), rtol=1e-12)
    scaled = np.array([specfun.bessel_k_scaled(mu, v) for v in z])
    np.testing.assert_allclose(scaled, special.kve(mu, z), rtol=1e-12)


def test_k_positive_on_grid():
    for mu in np.linspace(-3, 3, 25):
        for z in np.geomspace(1e-3, 50, 30):
            assert specfun.bessel_k(mu, z) > 0


def test_k_reflection_refuses_near_integer():
    with pytest.raises(PrecisionLossError):
        specfun.bessel_k_reflection(1.01, 2.0)
    with pytest.raises(PrecisionLossError) as info:
        specfun.bessel_k_reflection(0.3, 25.0)
    assert info.value.estimated_rel_error > 1e-6
    assert specfun.bessel_k_reflection(0.3, 1.0) == pytest.approx(special.kv(0.3, 1.0), rel=1e-13)


def test_k_interpolation_is_only_approximate():
    # Quadratic interpolation from +-0.05 misses the integer-order value by more than the
    # integral route does, which is why bessel_k does not use it.
    err = abs(specfun.bessel_k_interpolated(1.0, 2.0) / special.kv(1.0, 2.0) - 1)
    assert 1e-8 < err < 1e-3
    assert abs(specfun.bessel_k(1.0, 2.0) / special.kv(1.0, 2.0) - 1) < 1e-13


# --- erfc and incomplete gamma ----------------------------------------------------

def test_erfc_examples():
    assert specfun.erfc(0.0) == 1.0
    assert specfun.erfc(-1.3) == pytest.approx(2 - specfun.erfc(1.3), rel=1e-15)
    for z in (10.0, 20.0):
        ratio = specfun.erfc(z) * z * math.exp(z * z) * math.sqrt(math.pi)
        assert ratio == pytest.approx(1.0, abs=1.0 / z**2)


def test_erfc_against_integral():
    # Independent check of the normalisation: numeric integral of exp(-u^2).
    from scipy import integrate

    for z in (0.2, 1.0, 2.5):
        val = 2 / math.sqrt(math.pi) * integrate.quad(lambda u: math.exp(-u * u), z, np.inf)[0]
        assert specfun.erfc(z) == pytest.approx(val, rel=1e-10)


def test_incomplete_gamma_examples():
    for x in (0.1, 1.0, 5.0, 30.0):
        assert specfun.upper_incomplete_gamma(1.0, x) == pytest.approx(math.exp(-x), rel=1e-14)
    assert specfun.upper_incomplete_gamma(2.0, 3.0) == pytest.approx(4 * math.exp(-3), rel=1e-14)
    for mu in (0.5, 2.5):
        r = specfun.upper_incomplete_gamma(mu, 500.0) / (500.0 ** (mu - 1) * math.exp(-500.0))
        assert r == pytest.approx(1.0, abs=5e-3)


@pytest.mark.parametrize("mu", [0.2, 1.0, 3.7, 10.0])
def test_incomplete_gamma_against_scipy(mu):
    for x in (0.01, 0.5, mu, mu + 1.5, 20.0, 80.0):
        expected = special.gammaincc(mu, x) * special.gamma(mu)
        assert specfun.upper_incomplete_gamma(mu, x) == pytest.approx(expected, rel=1e-12)


def test_incomplete_gamma_domain():
    with pytest.raises(DomainError):
        specfun.upper_incomplete_gamma(0.0, 1.0)
