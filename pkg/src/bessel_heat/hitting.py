"""Density of the first hitting time of level a by a Bessel process.

Apart from the exact mu = 1/2 formula, everything here is written at
a = 1; use :func:`to_unit_level` to rescale before calling.
"""

import math

from .errors import DomainError
from .kernels import Bracket

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _check(x, s, a=1.0):
    if not (a > 0 and x > a and s > 0):
        raise DomainError(f"need x > a > 0 and s > 0, got a={a}, x={x}, s={s}")


def to_unit_level(a: float, x: float, s: float):
    """Return ``(x/a, s/a^2, factor)`` with q_{x,a}(s) = factor * q_{x/a,1}(s/a^2)."""
    _check(x, s, a)
    return x / a, s / (a * a), a ** -2.0


def _density(a, x, s, weight):
    d = x - a
    return weight * d / (_SQRT_2PI * s**1.5) * math.exp(-d * d / (2.0 * s))


def q_half_exact(a: float, x: float, s: float) -> float:
    """Hitting density of level a for BES(1/2) started at x.

    The factor a/x is the probability of ever reaching a; at a = 1 this
    is the textbook formula ((x-1)/x) (2 pi s^3)^(-1/2) exp(-(x-1)^2/2s).
    """
    _check(x, s, a)
    return _density(a, x, s, a / x)


def q_asymptotic(mu: float, x: float, s: float):
    """Leading asymptotic form at a = 1 and its O(s/x) error scale."""
    _check(x, s)
    weight = 1.0 / x if mu == 0.5 else x ** (-mu - 0.5)
    return _density(1.0, x, s, weight), s / x


def q_bounds(mu: float, x: float, s: float) -> Bracket:
    """Rigorous bounds on the a = 1 hitting density for mu >= 0."""
    if mu < 0:
        raise DomainError("q_bounds needs mu >= 0")
    value, _ = q_asymptotic(mu, x, s)
    if mu < 0.5:
        return Bracket(value, value * (1.0 + (1.0 - 4.0 * mu * mu) / 8.0 * s / x),
                       "two-sided, 0 <= mu < 1/2")
    return Bracket(None, value, "upper only, mu >= 1/2")


def q_envelope(mu: float, x: float, s: float) -> float:
    """Comparison quantity matching the hitting density up to constants (a = 1)."""
    _check(x, s)
    gauss = math.exp(-(x - 1.0) ** 2 / (2.0 * s)) / s**1.5
    if mu == 0:
        return ((x - 1.0) / x * gauss * (1.0 + math.log(x)) / (1.0 + math.log(s + x))
                * math.sqrt(x + s) / (1.0 + math.log1p(s / x)))
    m = abs(mu)
    return ((x - 1.0) * min(1.0, x ** (-2.0 * mu)) * gauss
            * x ** (2.0 * m - 1.0) * (s + x) ** (0.5 - m))
