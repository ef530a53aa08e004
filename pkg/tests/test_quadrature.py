import itertools
import math

import mpmath
import numpy as np
import pytest
from scipy import integrate, special

from bessel_heat import kernels, quadrature
from bessel_heat.errors import DomainError, QuadratureFailure
from bessel_heat.quadrature import QuadratureSpec, SingularIntegrand

GRID_AB = (0.1, 0.5, 1.0, 2.0, 5.0)
GRID_T = (0.5, 1.0, 4.0)


def test_integrand_invariants():
    with pytest.raises(DomainError):
        SingularIntegrand(0.0, 1.0, 1.0, p=-1.5)
    with pytest.raises(DomainError):
        SingularIntegrand(1.0, 0.0, 1.0, q=-1.0)
    with pytest.raises(DomainError):
        SingularIntegrand(-1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        QuadratureSpec(rel_tol=0)
    f = SingularIntegrand(1.0, 2.0, 3.0)
    s = 1.2
    assert f(s) == pytest.approx(s**-1.5 * (3 - s) ** -0.5 * math.exp(-1 / s - 2 / (3 - s)))


def test_lemma_example_symmetric_pits():
    # (sqrt A + sqrt B)^2 / t = 2 here, so the closed form is sqrt(2 pi) e^-2.
    f = SingularIntegrand(0.5, 0.5, 1.0)
    ref = integrate.quad(f, 0, 1, epsabs=0, epsrel=1e-12, limit=200)[0]
    assert ref == pytest.approx(math.sqrt(2 * math.pi) * math.exp(-2), rel=1e-10)
    assert quadrature.integrate_singular(f) == pytest.approx(ref, rel=1e-10)


def test_plain_pit_against_midpoint_rule():
    n = 200_000
    s = (np.arange(n) + 0.5) * (2.0 / n)
    midpoint = float(np.sum(np.exp(-1.0 / s)) * (2.0 / n))
    val = quadrature.integrate_singular(SingularIntegrand(1.0, 0.0, 2.0, p=0.0, q=0.0))
    assert val == pytest.approx(midpoint, rel=1e-6)


def test_beta_half_half():
    val = quadrature.integrate_singular(SingularIntegrand(0.0, 0.0, 1.0, p=-0.5, q=-0.5))
    assert val == pytest.approx(math.pi, rel=1e-10)


def test_algebraic_endpoints_against_beta():
    for p, q in ((0.3, -0.7), (-0.9, 2.0), (1.5, 0.0)):
        val = quadrature.integrate_singular(SingularIntegrand(0.0, 0.0, 2.0, p=p, q=q))
        expected = 2.0 ** (p + q + 1) * special.beta(p + 1, q + 1)
        assert val == pytest.approx(expected, rel=1e-9)


def test_closed_mu12_examples():
    assert quadrature.closed_mu12(0.5, 0.5, 1.0) == pytest.approx(math.sqrt(2 * math.pi) * math.exp(-2), rel=1e-15)
    assert quadrature.closed_mu12(1.3, 0.0, 2.0) == pytest.approx(
        math.sqrt(math.pi / 2.6) * math.exp(-1.3 / 2), rel=1e-15)
    num = quadrature.integrate_singular(SingularIntegrand(2.0, 3.0, 5.0))
    closed = quadrature.closed_mu12(2.0, 3.0, 5.0)
    assert closed == pytest.approx(math.sqrt(math.pi / 10) * math.exp(-(math.sqrt(2) + math.sqrt(3)) ** 2 / 5))
    assert abs(num / closed - 1) <= 1e-8


def test_closed_mu12_against_scipy_quad():
    for A, B, t in ((0.3, 1.7, 2.0), (4.0, 0.2, 0.7)):
        f = SingularIntegrand(A, B, t)
        ref = integrate.quad(f, 0, t, epsabs=0, epsrel=1e-12, limit=200)[0]
        assert quadrature.closed_mu12(A, B, t) == pytest.approx(ref, rel=1e-9)


def test_closed_mu32_examples():
    assert quadrature.closed_mu32(1e-14, 1e-14, 1.0) == pytest.approx(math.pi, rel=1e-6)
    num = quadrature.integrate_singular(SingularIntegrand(1.0, 1.0, 1.0, p=-0.5, q=-0.5))
    assert quadrature.closed_mu32(1.0, 1.0, 1.0) == pytest.approx(math.pi * math.erfc(2.0), rel=1e-15)
    assert abs(num / quadrature.closed_mu32(1.0, 1.0, 1.0) - 1) <= 1e-8


def test_closed_mu32_gaussian_tail_ratio():
    # (sqrt c + sqrt d)/sqrt t = 5: value / (e^{-z^2}/z) tends to sqrt(pi) up to O(1/z^2).
    for c, d, t in ((1.0, 4.0, 9.0 / 25.0), (6.25, 0.0, 0.25), (0.25, 0.25, 1 / 25)):
        z = (math.sqrt(c) + math.sqrt(d)) / math.sqrt(t)
        assert z == pytest.approx(5.0)
        ratio = quadrature.closed_mu32(c, d, t) / (math.exp(-z * z) / z)
        assert 0.95 * math.sqrt(math.pi) <= ratio <= math.sqrt(math.pi)


def test_oracle_grids():
    for A, B, t in itertools.product(GRID_AB, GRID_AB, GRID_T):
        num = quadrature.integrate_singular(SingularIntegrand(A, B, t))
        assert abs(num / quadrature.closed_mu12(A, B, t) - 1) <= 1e-8
        num = quadrature.integrate_singular(SingularIntegrand(A, B, t, -0.5, -0.5))
        assert abs(num / quadrature.closed_mu32(A, B, t) - 1) <= 1e-8


def test_monotone_in_pits():
    for t in GRID_T:
        vals = np.array([[quadrature.integrate_singular(SingularIntegrand(A, B, t))
                          for B in GRID_AB] for A in GRID_AB])
        assert np.all(vals >= 0)
        assert np.all(np.diff(vals, axis=0) <= 0)
        assert np.all(np.diff(vals, axis=1) <= 0)


def test_k_integral_examples():
    for c, d in itertools.product((0.5, 1.0, 4.0), repeat=2):
        assert quadrature.k_integral(0.5, c, d) == pytest.approx(
            math.sqrt(math.pi / c) * math.exp(-2 * math.sqrt(c * d)), rel=1e-12)
    assert quadrature.integrate_k_family(0.5, 1.0, 1.0) == pytest.approx(math.sqrt(math.pi) * math.exp(-2), rel=1e-8)
    assert quadrature.integrate_k_family(0.0, 2.0, 3.0) == pytest.approx(
        2 * special.kv(0, 2 * math.sqrt(6)), rel=1e-8)


@pytest.mark.parametrize("mu", [0.0, 0.3, 0.5, 1.0, 2.7])
def test_k_integral_grid_against_mpmath(mu):
    for c, d in itertools.product((0.5, 1.0, 4.0), repeat=2):
        ref = float(mpmath.quad(lambda w: w ** (mu - 1) * mpmath.exp(-c * w - d / w), [0, 1, mpmath.inf]))
        assert quadrature.k_integral(mu, c, d) == pytest.approx(ref, rel=1e-10)
        assert quadrature.integrate_k_family(mu, c, d) == pytest.approx(ref, rel=1e-10)


def test_hunt_integral_closed_form():
    from bessel_heat.hitting import q_half_exact

    r = quadrature.hunt_integral(0.5, 1.0, 1.0, 2.0, 3.0, lambda s: q_half_exact(1.0, 2.0, s))
    assert abs(r / kernels.exact_half_r(1.0, 1.0, 2.0, 3.0) - 1) <= 1e-8


def test_hunt_integral_far_endpoint():
    from bessel_heat.hitting import q_half_exact

    # t = 4 keeps r representable out to y = 50 (at t = 1 it is ~e^-1200).
    for y in (5.0, 10.0, 20.0, 35.0, 50.0):
        r = quadrature.hunt_integral(0.5, 1.0, 4.0, 2.0, y, lambda s: q_half_exact(1.0, 2.0, s))
        assert abs(r / kernels.exact_half_r(1.0, 4.0, 2.0, y) - 1) <= 1e-8


def test_hunt_integral_start_at_barrier():
    # Started just above a, T_a is almost immediate and r approaches p(t, a, y).
    from bessel_heat.hitting import q_half_exact

    a, x = 1.0, 1.0 + 1e-4
    for t, y in ((1.0, 2.0), (0.5, 1.5)):
        r = quadrature.hunt_integral(0.5, a, t, x, y, lambda s: q_half_exact(a, x, s))
        assert r == pytest.approx(kernels.free_kernel(0.5, t, a, y), rel=1e-2)


def test_hunt_integral_rejects_negative_density():
    with pytest.raises(DomainError):
        quadrature.hunt_integral(0.5, 1.0, 1.0, 2.0, 3.0, lambda s: -1.0)


def test_quadrature_failure_reports_estimate():
    spec = QuadratureSpec(rel_tol=1e-15, max_depth=1)
    with pytest.raises(QuadratureFailure) as info:
        quadrature.integrate_singular(SingularIntegrand(0.0, 0.0, 1.0, p=-0.999, q=0.0), spec)
    assert info.value.estimate > 0
    assert info.value.error_bound > 0


def test_lemma_expo_bounds_random():
    rng = np.random.default_rng(7)
    x = 1 + rng.exponential(1.0, 10_000)
    y = 1 + rng.exponential(1.0, 10_000)
    t = rng.exponential(1.0, 10_000) + 1e-3
    ea = np.exp(-(x - y) ** 2 / (2 * t))
    eb = np.exp(-(x + y - 2) ** 2 / (2 * t))
    assert np.all(eb * 2 * (x - 1) * (y - 1) <= t * (ea - eb) * (1 + 1e-12) + 1e-300)
    v = (x - 1) * (y - 1) / t
    ratio = -np.expm1(-2 * v)
    assert np.all((ratio[v >= 1] >= 1 - math.exp(-2) - 1e-15) & (ratio[v >= 1] <= 1))
