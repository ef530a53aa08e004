"""Modified Bessel functions of real order and related scalar functions.

All routines work on Python floats. Growth-prone functions come in three
flavours: plain, exponentially scaled (``*_scaled``) and logarithmic
(``log_*``); kernel code composes the scaled forms so nothing overflows.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._gk import gk_integrate
from .errors import (
    BesselOverflowError,
    DomainError,
    PrecisionLossError,
    SeriesBudgetExceeded,
)

_LOG_MAX = math.log(np.finfo(float).max)
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class BesselIndex:
    """Bessel index with the regime constant used by the expansions."""

    mu: float

    @property
    def abs_mu(self) -> float:
        return abs(self.mu)

    @property
    def t0(self) -> float:
        """Long/short time threshold at unit barrier level."""
        if self.abs_mu <= 0.5:
            return 1.0
        return 8.0 / (4.0 * self.mu * self.mu - 1.0)


@dataclass(frozen=True)
class SeriesControl:
    rel_tol: float = 1e-15
    max_terms: int = 500
    asym_switch: Optional[float] = None  # None means 30 + mu**2

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be positive")
        if self.max_terms < 1:
            raise DomainError("max_terms must be at least 1")
        if self.asym_switch is not None and not self.asym_switch > 0:
            raise DomainError("asym_switch must be positive")

    def switch_for(self, mu: float) -> float:
        if self.asym_switch is not None:
            return self.asym_switch
        return 30.0 + mu * mu


DEFAULT_CONTROL = SeriesControl()


def _check_z(z):
    if not z > 0:
        raise DomainError(f"argument must be positive, got {z!r}")


def _is_negative_integer(mu):
    return mu < 0 and mu == math.floor(mu)


def _log_gamma_signed(x):
    """Return ``(log|Gamma(x)|, sign)``; x must not be a non-positive integer."""
    if x > 0:
        return math.lgamma(x), 1.0
    return math.lgamma(x), (-1.0 if math.ceil(-x) % 2 else 1.0)


def _series_log(mu, z, ctl):
    """Ascending series as ``(log|I|, sign)``."""
    if _is_negative_integer(mu):
        mu = -mu  # I_{-n} = I_n
    lg, sign = _log_gamma_signed(mu + 1.0)
    log_lead = mu * math.log(0.5 * z) - lg
    q = 0.25 * z * z
    total = 1.0
    term = 1.0
    scale = 0.0  # running log offset for very large partial sums
    for k in range(1, ctl.max_terms + 1):
        term *= q / (k * (k + mu))
        total += term
        if abs(total) > 1e280:
            total *= 1e-280
            term *= 1e-280
            scale += 280.0 * math.log(10.0)
        if k + mu > 0 and k * (k + mu) > q and abs(term) <= ctl.rel_tol * abs(total):
            break
    else:
        raise SeriesBudgetExceeded(
            f"series for I_{mu}({z}) did not converge in {ctl.max_terms} terms",
            partial_sum=total * math.exp(log_lead + scale) * sign,
            last_term=term * math.exp(log_lead + scale) * sign,
        )
    if total == 0.0:
        return -math.inf, 1.0
    return log_lead + scale + math.log(abs(total)), sign * math.copysign(1.0, total)


def bessel_i_series(mu: float, z: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """I_mu(z) from the ascending power series."""
    _check_z(z)
    log_abs, sign = _series_log(mu, z, ctl)
    if log_abs > _LOG_MAX:
        raise BesselOverflowError(f"I_{mu}({z}) overflows; use log_bessel_i")
    return sign * math.exp(log_abs)


def coeff_c(mu, k: int):
    """Coefficient of (-1/z)**k in the large-argument series of I_mu.

    ``coeff_c(mu, 0)`` is 0 by convention; the leading 1 is added by callers.
    Works with ``fractions.Fraction`` orders for exact arithmetic.
    """
    if k < 0:
        raise DomainError("k must be non-negative")
    if k == 0:
        return 0 * mu
    m4 = 4 * mu * mu
    c = (m4 - 1) / 8
    for j in range(2, k + 1):
        c = c * (m4 - (2 * j - 1) ** 2) / (8 * j)
    return c


def _asym_bracket(mu, z, n):
    """``1 + sum_{k<n} c_k (-1/z)^k`` and ``|c_n| / z^n``."""
    total = 1.0
    c = 1.0
    m4 = 4.0 * mu * mu
    for k in range(1, n):
        c *= (m4 - (2 * k - 1) ** 2) / (8.0 * k)
        total += c * (-1.0 / z) ** k
    c *= (m4 - (2 * n - 1) ** 2) / (8.0 * n)
    return total, abs(c) / z**n


def bessel_i_asym(mu: float, z: float, n: int):
    """Large-argument expansion truncated after ``n`` terms.

    Returns ``(value, first_omitted_scale)`` where the scale is
    ``|c_n| / z**n``, relative to the leading factor.
    """
    _check_z(z)
    if n < 1:
        raise DomainError("n must be at least 1")
    bracket, scale = _asym_bracket(mu, z, n)
    if z > _LOG_MAX:
        raise BesselOverflowError(f"e^{z} overflows; use log_bessel_i_asym")
    return math.exp(z) / math.sqrt(2.0 * math.pi * z) * bracket, scale


def log_bessel_i_asym(mu: float, z: float, n: int):
    """Logarithm of :func:`bessel_i_asym` (the bracket must be positive)."""
    _check_z(z)
    if n < 1:
        raise DomainError("n must be at least 1")
    bracket, scale = _asym_bracket(mu, z, n)
    if bracket <= 0:
        raise DomainError("truncated series is not positive at this argument")
    return z - 0.5 * math.log(2.0 * math.pi * z) + math.log(bracket), scale


def _asym_scaled_adaptive(mu, z, sign_alternating=True, max_terms=200):
    """sum_k c_k (-+1/z)^k summed to optimal truncation, times 1/sqrt(2 pi z)."""
    total = 1.0
    c = 1.0
    m4 = 4.0 * mu * mu
    s = -1.0 if sign_alternating else 1.0
    prev = math.inf
    for k in range(1, max_terms):
        c *= (m4 - (2 * k - 1) ** 2) / (8.0 * k)
        term = c * (s / z) ** k
        if abs(term) > prev:
            break
        total += term
        prev = abs(term)
        if prev <= 0.1 * _EPS * abs(total):
            break
    return total


def _half_order_scaled(mu, z):
    # I_{1/2} = sqrt(2/(pi z)) sinh z and I_{-1/2} = sqrt(2/(pi z)) cosh z
    tail = np.expm1(-2.0 * z) if mu > 0 else 2.0 + np.expm1(-2.0 * z)
    return np.abs(tail) / np.sqrt(2.0 * math.pi * z)


def bessel_i_scaled(mu: float, z: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """exp(-z) * I_mu(z)."""
    _check_z(z)
    if abs(mu) == 0.5:
        return float(_half_order_scaled(mu, z))
    if z >= ctl.switch_for(mu):
        return _asym_scaled_adaptive(mu, z) / math.sqrt(2.0 * math.pi * z)
    log_abs, sign = _series_log(mu, z, ctl)
    return sign * math.exp(log_abs - z)


def log_bessel_i(mu: float, z: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """log I_mu(z) for orders where I_mu(z) > 0."""
    _check_z(z)
    if z >= ctl.switch_for(mu):
        return z + math.log(_asym_scaled_adaptive(mu, z)) - 0.5 * math.log(2.0 * math.pi * z)
    log_abs, sign = _series_log(mu, z, ctl)
    if sign < 0:
        raise DomainError(f"I_{mu}({z}) is negative")
    return log_abs


def bessel_i(mu: float, z: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """I_mu(z): ascending series below the switch, asymptotic series above."""
    _check_z(z)
    if z >= ctl.switch_for(mu):
        log_lead = z - 0.5 * math.log(2.0 * math.pi * z)
        if log_lead > _LOG_MAX:
            raise BesselOverflowError(f"I_{mu}({z}) overflows; use log_bessel_i")
        return math.exp(log_lead) * _asym_scaled_adaptive(mu, z)
    return bessel_i_series(mu, z, ctl)


def bessel_i_scaled_array(mu: float, z, ctl: SeriesControl = DEFAULT_CONTROL):
    """Vectorised :func:`bessel_i_scaled` for ``mu > -1`` and an array of z."""
    if not mu > -1:
        raise DomainError("array form needs mu > -1")
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0)):
        raise DomainError("arguments must be positive")
    if abs(mu) == 0.5:
        return _half_order_scaled(mu, z)
    out = np.empty(z.shape)
    big = z >= ctl.switch_for(mu)

    zs = z[~big]
    if zs.size:
        q = 0.25 * zs * zs
        total = np.ones_like(zs)
        term = np.ones_like(zs)
        done = np.zeros(zs.shape, dtype=bool)
        for k in range(1, ctl.max_terms + 1):
            term = term * q / (k * (k + mu))
            total = total + np.where(done, 0.0, term)
            done |= (k * (k + mu) > q) & (term <= ctl.rel_tol * total)
            if done.all():
                break
        else:
            raise SeriesBudgetExceeded("array series did not converge",
                                       partial_sum=total, last_term=term)
        log_lead = mu * np.log(0.5 * zs) - math.lgamma(mu + 1.0)
        out[~big] = np.exp(log_lead + np.log(total) - zs)

    zb = z[big]
    if zb.size:
        total = np.ones_like(zb)
        prev = np.full(zb.shape, np.inf)
        live = np.ones(zb.shape, dtype=bool)
        c = 1.0
        m4 = 4.0 * mu * mu
        for k in range(1, 200):
            c *= (m4 - (2 * k - 1) ** 2) / (8.0 * k)
            term = c * (-1.0 / zb) ** k
            live &= np.abs(term) <= prev
            total = total + np.where(live, term, 0.0)
            prev = np.abs(term)
            live &= prev > 0.1 * _EPS * np.abs(total)
            if not live.any():
                break
        out[big] = total / np.sqrt(2.0 * math.pi * zb)
    return out


# --- second kind -------------------------------------------------------------

_NEAR_INTEGER = 0.05
_K_LOSS_LIMIT = 1e-6
_K_DISPATCH_LOSS = 1e-14  # dispatcher prefers the integral beyond this


def bessel_k_reflection(mu: float, z: float, ctl: SeriesControl = DEFAULT_CONTROL,
                        max_loss: float = _K_LOSS_LIMIT) -> float:
    """K_mu(z) = (pi/2) (I_{-mu} - I_mu) / sin(pi mu), straight from the definition.

    Raises :class:`PrecisionLossError` when the subtraction is estimated to
    cost more than 1e-6 relative accuracy, or when ``mu`` is within 0.05 of
    an integer.
    """
    _check_z(z)
    mu = abs(mu)
    dist = abs(mu - round(mu))
    if dist < _NEAR_INTEGER - 1e-12:
        raise PrecisionLossError(
            f"order {mu} is within {_NEAR_INTEGER} of an integer; use bessel_k",
            estimated_rel_error=math.inf)
    # Series in scaled form: both I's carry exp(z).
    i_neg = bessel_i_scaled(-mu, z, ctl) if z < ctl.switch_for(mu) else None
    i_pos = bessel_i_scaled(mu, z, ctl)
    if i_neg is None:
        raise PrecisionLossError(
            f"argument {z} beyond the series branch; cancellation is total",
            estimated_rel_error=math.inf)
    diff = i_neg - i_pos
    value_scaled = 0.5 * math.pi * diff / math.sin(math.pi * mu)
    loss = 8 * _EPS * (abs(i_neg) + abs(i_pos)) / abs(diff) if diff else math.inf
    if loss > max_loss:
        raise PrecisionLossError(
            f"reflection formula loses {loss:.1e} relative accuracy at z={z}",
            estimated_rel_error=loss)
    return value_scaled * math.exp(z)


def bessel_k_scaled_integral(mu: float, z: float, rel_tol: float = 1e-13) -> float:
    """exp(z) K_mu(z) from the integral of exp(-z cosh s) cosh(mu s) over s > 0."""
    _check_z(z)
    mu = abs(mu)

    def f(s):
        return np.exp(-z * (np.cosh(s) - 1.0) + mu * s) * 0.5 * (1.0 + np.exp(-2.0 * mu * s))

    # Upper limit where the exponent has dropped by ~745 past its peak.
    peak = math.asinh(mu / z) if mu > 0 else 0.0
    top = peak + 1.0
    while -z * (math.cosh(top) - 1.0) + mu * top > _peak_exponent(mu, z, peak) - 745.0:
        top *= 1.5
    value, _ = gk_integrate(f, 0.0, top, rel_tol=rel_tol, abs_tol=0.0,
                            initial=(peak,) if peak > 0 else None)
    return value


def _peak_exponent(mu, z, peak):
    return -z * (math.cosh(peak) - 1.0) + mu * peak


def bessel_k_scaled(mu: float, z: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """exp(z) * K_mu(z)."""
    _check_z(z)
    mu = abs(mu)
    try:
        return bessel_k_reflection(mu, z, ctl, _K_DISPATCH_LOSS) * math.exp(z)
    except PrecisionLossError:
        return bessel_k_scaled_integral(mu, z)


def bessel_k(mu: float, z: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """K_mu(z) for real order; even in ``mu``.

    Orders at least 0.05 from an integer use the reflection formula when
    the cancellation is mild; otherwise the cosh integral representation.
    """
    _check_z(z)
    mu = abs(mu)
    try:
        return bessel_k_reflection(mu, z, ctl, _K_DISPATCH_LOSS)
    except PrecisionLossError:
        return bessel_k_scaled_integral(mu, z) * math.exp(-z)


def log_bessel_k(mu: float, z: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    return math.log(bessel_k_scaled(mu, z, ctl)) - z


def bessel_k_interpolated(mu: float, z: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Near-integer K_mu(z) by quadratic interpolation from offsets of 0.05.

    Kept for comparison only; its error is of order 1e-5, see tests.
    """
    mu = abs(mu)
    n = round(mu)
    h = _NEAR_INTEGER
    if n == 0:
        # Even function: fit c0 + c2 mu^2 through mu = h and 2h.
        k1 = bessel_k_reflection(h, z, ctl)
        k2 = bessel_k_reflection(2 * h, z, ctl)
        c2 = (k2 - k1) / (3 * h * h)
        return k1 + c2 * (mu * mu - h * h)
    nodes = [n - h, n + h, n + 2 * h]
    vals = [bessel_k_reflection(m, z, ctl) for m in nodes]
    out = 0.0
    for i, (xi, fi) in enumerate(zip(nodes, vals)):
        w = 1.0
        for j, xj in enumerate(nodes):
            if j != i:
                w *= (mu - xj) / (xi - xj)
        out += w * fi
    return out


# --- error function and incomplete gamma ------------------------------------

def erfc(z: float) -> float:
    """Complementary error function (2/sqrt(pi)) * int_z^inf exp(-u^2) du."""
    return math.erfc(z)


def upper_incomplete_gamma(mu: float, x: float) -> float:
    """int_x^inf r^(mu-1) exp(-r) dr for mu > 0, x > 0."""
    if not (mu > 0 and x > 0):
        raise DomainError("upper_incomplete_gamma needs mu > 0 and x > 0")
    log_pref = mu * math.log(x) - x
    if x > mu + 1.0:
        # Modified Lentz evaluation of the continued fraction.
        tiny = 1e-300
        b = x + 1.0 - mu
        c = 1.0 / tiny
        d = 1.0 / b
        h = d
        for i in range(1, 1000):
            an = -i * (i - mu)
            b += 2.0
            d = an * d + b
            d = tiny if abs(d) < tiny else d
            c = b + an / c
            c = tiny if abs(c) < tiny else c
            d = 1.0 / d
            delta = d * c
            h *= delta
            if abs(delta - 1.0) < 1e-16:
                break
        return math.exp(log_pref) * h
    # Lower gamma by series, then complement.
    term = 1.0 / mu
    total = term
    ap = mu
    for _ in range(1000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-17:
            break
    return math.gamma(mu) - math.exp(log_pref) * total
