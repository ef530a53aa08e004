"""Integration of exponentially pitted integrands on (0, t) and (0, inf).

The integrands met here look like ``s^p (t-s)^q exp(-A/s - B/(t-s))``:
smooth inside, with essential-singularity pits at one or both ends. Each
half of the interval is mapped by ``w = 1/s - 1/t`` (or the mirror image),
which turns a pit into an ordinary exponential tail, and the smooth result
goes to adaptive Gauss-Kronrod.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from ._gk import gk_integrate, gk_integrate_halfline
from .errors import DomainError


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-300
    max_depth: int = 60

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be positive")
        if self.max_depth < 1:
            raise DomainError("max_depth must be at least 1")


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class SingularIntegrand:
    """s -> s^p (t-s)^q exp(-A/s) exp(-B/(t-s)) on (0, t)."""

    A: float
    B: float
    t: float
    p: float = -1.5
    q: float = -0.5

    def __post_init__(self):
        if self.A < 0 or self.B < 0 or not self.t > 0:
            raise DomainError("need A >= 0, B >= 0 and t > 0")
        if not (self.A > 0 or self.p > -1):
            raise DomainError("left end not integrable: A == 0 and p <= -1")
        if not (self.B > 0 or self.q > -1):
            raise DomainError("right end not integrable: B == 0 and q <= -1")

    def log_value(self, s, tau):
        """log of the integrand at s, with tau = t - s passed separately."""
        return (self.p * np.log(s) + self.q * np.log(tau)
                - self.A / s - self.B / tau)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return np.exp(self.log_value(s, self.t - s))


def _half_with_pit(log_f, t, pit, spec):
    """Integrate exp(log_f(s, tau)) over s in (0, t/2] when the s -> 0 end has a pit.

    ``log_f`` takes the near-end variable s and its complement tau = t - s.
    """
    inv_t = 1.0 / t

    def g(w):
        s = 1.0 / (w + inv_t)
        tau = w * t * s  # t - s without cancellation
        return np.exp(log_f(s, tau) + 2.0 * np.log(s))

    return gk_integrate_halfline(g, inv_t, 1.0 / pit, rel_tol=spec.rel_tol,
                                 abs_tol=spec.abs_tol, max_depth=spec.max_depth)


def _half_with_power(log_rest, t, power, spec):
    """Integrate s^power * exp(log_rest(s, tau)) over (0, t/2] when power > -1.

    Uses s = (t/2) v^(1/(power+1)), which absorbs the algebraic singularity.
    """
    h = 0.5 * t
    k = 1.0 / (power + 1.0)
    const = h ** (power + 1.0) * k

    def g(v):
        s = h * v**k
        return const * np.exp(log_rest(s, t - s))

    return gk_integrate(g, 0.0, 1.0, rel_tol=spec.rel_tol, abs_tol=spec.abs_tol,
                        max_depth=spec.max_depth)


def _integrate_halves(left, right, spec):
    (v1, e1), (v2, e2) = left, right
    return v1 + v2, e1 + e2


def integrate_singular(f: SingularIntegrand, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Integral of ``f`` over (0, f.t)."""
    return integrate_singular_with_error(f, spec)[0]


def integrate_singular_with_error(f: SingularIntegrand, spec: QuadratureSpec = DEFAULT_SPEC):
    t = f.t

    if f.A > 0:
        left = _half_with_pit(f.log_value, t, f.A, spec)
    else:
        left = _half_with_power(
            lambda s, tau: f.q * np.log(tau) - f.B / tau, t, f.p, spec)

    mirrored = SingularIntegrand(A=f.B, B=f.A, t=t, p=f.q, q=f.p)
    if f.B > 0:
        right = _half_with_pit(mirrored.log_value, t, f.B, spec)
    else:
        right = _half_with_power(
            lambda s, tau: f.p * np.log(tau) - f.A / tau, t, f.q, spec)
    return _integrate_halves(left, right, spec)


def closed_mu12(A: float, B: float, t: float) -> float:
    """Exact integral of s^(-3/2) (t-s)^(-1/2) exp(-A/s - B/(t-s)) over (0, t)."""
    if not A > 0:
        raise DomainError("closed_mu12 needs A > 0")
    if B < 0 or not t > 0:
        raise DomainError("closed_mu12 needs B >= 0 and t > 0")
    return math.sqrt(math.pi / (A * t)) * math.exp(-(math.sqrt(A) + math.sqrt(B)) ** 2 / t)


def closed_mu32(c: float, d: float, t: float) -> float:
    """Exact integral of s^(-1/2) (t-s)^(-1/2) exp(-c/s - d/(t-s)) over (0, t).

    Equals pi * erfc((sqrt(c) + sqrt(d)) / sqrt(t)).
    """
    if c < 0 or d < 0 or not t > 0:
        raise DomainError("closed_mu32 needs c, d >= 0 and t > 0")
    return math.pi * specfun.erfc((math.sqrt(c) + math.sqrt(d)) / math.sqrt(t))


def k_integral(mu: float, c: float, d: float) -> float:
    """Closed form 2 (d/c)^(mu/2) K_mu(2 sqrt(cd)) of int_0^inf w^(mu-1) e^(-cw - d/w) dw."""
    if not (c > 0 and d > 0):
        raise DomainError("k_integral needs c, d > 0")
    z = 2.0 * math.sqrt(c * d)
    log_val = (math.log(2.0) + 0.5 * mu * math.log(d / c)
               + specfun.log_bessel_k(mu, z))
    return math.exp(log_val)


def integrate_k_family(mu: float, c: float, d: float,
                       spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Numerical int_0^inf w^(mu-1) exp(-c w - d/w) dw.

    Integrates over u = log w, truncating both tails where the integrand
    has fallen ~700 e-folds below its peak; a doubled window must agree.
    """
    if not (c > 0 and d > 0):
        raise DomainError("integrate_k_family needs c, d > 0")

    def expo(u):
        return mu * u - c * np.exp(u) - d * np.exp(-u)

    # Peak of the exponent: c e^u - d e^-u = mu.
    u_star = math.log((mu + math.sqrt(mu * mu + 4.0 * c * d)) / (2.0 * c))
    peak = float(expo(u_star))

    def edge(direction):
        step = 1.0
        while float(expo(u_star + direction * step)) > peak - 700.0:
            step *= 2.0
        return u_star + direction * step

    def window(lo, hi):
        return gk_integrate(lambda u: np.exp(expo(u) - peak), lo, hi,
                            rel_tol=spec.rel_tol, abs_tol=0.0,
                            max_depth=spec.max_depth, initial=(u_star,))[0]

    lo, hi = edge(-1.0), edge(1.0)
    value = window(lo, hi)
    wider = window(u_star - 2.0 * (u_star - lo), u_star + 2.0 * (hi - u_star))
    if abs(wider - value) > 10 * spec.rel_tol * abs(wider):
        raise DomainError("tail truncation is not converged")
    return wider * math.exp(peak)


def _as_vector(func):
    def wrapped(s):
        s = np.asarray(s, dtype=float)
        try:
            out = np.asarray(func(s), dtype=float)
            if out.shape == s.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.array([float(func(float(v))) for v in s.ravel()]).reshape(s.shape)
    return wrapped


def hunt_integral(mu: float, a: float, t: float, x: float, y: float, q_density,
                  spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """r_a(t, x, y) = int_0^t p(t - s, a, y) q(s) ds for a hitting density q.

    ``q_density`` maps hitting time s to the density of T_a started at x.
    """
    return hunt_integral_with_error(mu, a, t, x, y, q_density, spec)[0]


def hunt_integral_with_error(mu, a, t, x, y, q_density, spec=DEFAULT_SPEC):
    from .kernels import free_kernel_array

    if not (a > 0 and t > 0 and x > a and y > a):
        raise DomainError("hunt_integral needs a > 0, t > 0, x > a, y > a")
    q = _as_vector(q_density)

    def checked_q(s):
        vals = q(s)
        if np.any(vals < 0):
            raise DomainError("hitting density returned a negative value")
        return vals

    def log_integrand(s, tau):
        with np.errstate(divide="ignore"):
            return (np.log(free_kernel_array(mu, tau, a, y))
                    + np.log(checked_q(s)))

    def log_mirror(tau, s):
        return log_integrand(s, tau)

    left = _half_with_pit(log_integrand, t, 0.5 * (x - a) ** 2, spec)
    right = _half_with_pit(log_mirror, t, 0.5 * (y - a) ** 2, spec)
    return _integrate_halves(left, right, spec)
