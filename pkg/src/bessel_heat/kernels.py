"""Heat kernels of the Bessel operator on the half-line (a, inf).

Densities are taken with respect to the measure y^(2 mu + 1) dy. The
killed kernel p_a has an elementary closed form only at mu = 1/2; for
other indices it is available as a large-xy/t expansion, a rigorous
bracket, or numerically through the Hunt formula.
"""

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from . import specfun
from .errors import CatastrophicSubtraction, DomainError
from .quadrature import DEFAULT_SPEC, QuadratureSpec, hunt_integral_with_error

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class Regime(enum.Enum):
    SHORT_TIME = "ShortTime"
    LONG_INTERIOR = "LongInterior"
    LONG_BOUNDARY_TIGHT = "LongBoundaryTight"
    LONG_BOUNDARY_DEEP = "LongBoundaryDeep"
    NON_ASYMPTOTIC = "NonAsymptotic"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class KernelQuery:
    a: float
    t: float
    x: float
    y: float

    def __post_init__(self):
        if not (self.a > 0 and self.t > 0):
            raise DomainError(f"need a > 0 and t > 0, got a={self.a}, t={self.t}")
        if not (self.x > self.a and self.y > self.a):
            raise DomainError(f"need x, y > a, got x={self.x}, y={self.y}, a={self.a}")

    @property
    def u(self) -> float:
        """xy/t, the large parameter of the expansions."""
        return self.x * self.y / self.t

    @property
    def v(self) -> float:
        """(x-a)(y-a)/t, which controls the boundary factor."""
        return (self.x - self.a) * (self.y - self.a) / self.t

    def sorted(self) -> "KernelQuery":
        if self.x <= self.y:
            return self
        return KernelQuery(self.a, self.t, self.y, self.x)


@dataclass(frozen=True)
class ExpansionEval:
    value: float
    leading: float
    correction: float  # signed sum multiplying the leading term, minus 1
    error_scale: float
    regime: Regime
    order_n: int
    note: str = "structural error scale, constant unspecified"


@dataclass(frozen=True)
class Bracket:
    lower: Optional[float]
    upper: float
    tag: str = ""

    def __post_init__(self):
        if self.lower is not None and self.lower > self.upper * (1 + 1e-15):
            raise ValueError(f"bracket lower {self.lower} exceeds upper {self.upper}")

    def contains(self, value: float, rel_slack: float = 0.0) -> bool:
        lo_ok = self.lower is None or value >= self.lower * (1 - rel_slack)
        return lo_ok and value <= self.upper * (1 + rel_slack)

    @property
    def midpoint(self) -> float:
        if self.lower is None:
            raise ValueError("one-sided bracket has no midpoint")
        return 0.5 * (self.lower + self.upper)


# --- free kernel -------------------------------------------------------------

def free_kernel(mu: float, t: float, x: float, y: float) -> float:
    """Transition density of BES(mu) without killing, relative to y^(2mu+1) dy."""
    if not (t > 0 and x > 0 and y > 0):
        raise DomainError("free_kernel needs t, x, y > 0")
    z = x * y / t
    d = (x - y) ** 2 / (2.0 * t)
    scaled = specfun.bessel_i_scaled(abs(mu), z)
    if d < 700.0:
        try:
            return (x * y) ** (-mu) / t * math.exp(-d) * scaled
        except OverflowError:
            pass
    return math.exp(-mu * math.log(x * y) - math.log(t) - d + math.log(scaled))


def free_kernel_array(mu, t, x, y):
    """Vectorised :func:`free_kernel`; entries with t <= 0 give 0."""
    t, x, y = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float),
                                  np.asarray(y, float))
    out = np.zeros(t.shape)
    ok = t > 0
    if ok.any():
        tt, xx, yy = t[ok], x[ok], y[ok]
        scaled = specfun.bessel_i_scaled_array(abs(mu), xx * yy / tt)
        out[ok] = np.exp(-mu * np.log(xx * yy) - np.log(tt)
                         - (xx - yy) ** 2 / (2.0 * tt) + np.log(scaled))
    return out


def free_leading(mu: float, t: float, x: float, y: float) -> float:
    """(xy)^(-mu-1/2) (2 pi t)^(-1/2) exp(-(x-y)^2/(2t))."""
    return (x * y) ** (-mu - 0.5) / (_SQRT_2PI * math.sqrt(t)) * math.exp(-(x - y) ** 2 / (2.0 * t))


def _series_bracket(mu, ratio, n):
    """sum_{k=1}^{n-1} c_k (-ratio)^k."""
    total = 0.0
    for k in range(1, n):
        total += specfun.coeff_c(mu, k) * (-ratio) ** k
    return total


def free_kernel_expansion(mu: float, t: float, x: float, y: float, n: int,
                          u_floor: float = 10.0) -> ExpansionEval:
    """Large xy/t expansion of the free kernel with n terms."""
    if n < 1:
        raise DomainError("n must be at least 1")
    if x * y / t < u_floor:
        raise DomainError(f"xy/t = {x * y / t:.4g} below the floor {u_floor}")
    ratio = t / (x * y)
    lead = free_leading(mu, t, x, y)
    corr = _series_bracket(abs(mu), ratio, n)
    return ExpansionEval(value=lead * (1.0 + corr), leading=lead, correction=corr,
                         error_scale=ratio**n, regime=Regime.LONG_INTERIOR, order_n=n)


# --- exact mu = 1/2 formulas -------------------------------------------------

def _check_query(a, t, x, y):
    return KernelQuery(a, t, x, y)


def exact_half_kernel(a: float, t: float, x: float, y: float) -> float:
    """Killed kernel at mu = 1/2 in closed form."""
    _check_query(a, t, x, y)
    v = (x - a) * (y - a) / t
    # exp(-(x-y)^2/2t) - exp(-(x+y-2a)^2/2t) = exp(-(x-y)^2/2t) (1 - exp(-2v))
    return (math.exp(-(x - y) ** 2 / (2.0 * t)) * -math.expm1(-2.0 * v)
            / (_SQRT_2PI * math.sqrt(t) * x * y))


def exact_half_r(a: float, t: float, x: float, y: float) -> float:
    """Hunt subtrahend at mu = 1/2: mass that reached a before arriving at y."""
    _check_query(a, t, x, y)
    # exp(-(x+y-2a)^2/2t) - exp(-(x+y)^2/2t)
    # Written around exp(-(x-y)^2/2t), the factor shared with the killed and free
    # kernels, so that free = killed + r holds to rounding in O(1) quantities.
    v = (x - a) * (y - a) / t
    gap = 2.0 * a * (x + y - a) / t
    return (math.exp(-(x - y) ** 2 / (2.0 * t)) * math.exp(-2.0 * v) * -math.expm1(-gap)
            / (_SQRT_2PI * math.sqrt(t) * x * y))


def leading_term(mu: float, a: float, t: float, x: float, y: float) -> float:
    """g(t, x, y) = (xy)^(1/2 - mu) times the mu = 1/2 killed kernel."""
    return (x * y) ** (0.5 - mu) * exact_half_kernel(a, t, x, y)


# --- regimes and expansions --------------------------------------------------

def classify_regime(mu: float, a: float, t: float, x: float, y: float,
                    u_floor: float = 10.0) -> Regime:
    q = KernelQuery(a, t, x, y).sorted()
    if q.u < u_floor:
        return Regime.NON_ASYMPTOTIC
    if t < a * a * specfun.BesselIndex(mu).t0:
        return Regime.SHORT_TIME
    if q.x > 2.0 * a:
        return Regime.LONG_INTERIOR
    if q.y <= 2.0 * a:
        return Regime.NON_ASYMPTOTIC
    if q.v >= 1.0:
        return Regime.LONG_BOUNDARY_TIGHT
    return Regime.LONG_BOUNDARY_DEEP


def reflect_index(mu: float, a: float, t: float, x: float, y: float,
                  evaluator: Callable[..., float]) -> float:
    """Negative orders from positive ones: p^(mu) = (xy)^(-2 mu) p^(-mu)."""
    if mu >= 0:
        return evaluator(mu, a, t, x, y)
    return (x * y) ** (-2.0 * mu) * evaluator(-mu, a, t, x, y)


def _reflect_eval(mu, a, t, x, y, ev: ExpansionEval) -> ExpansionEval:
    f = (x * y) ** (-2.0 * mu)
    return ExpansionEval(value=f * ev.value, leading=f * ev.leading,
                         correction=ev.correction, error_scale=ev.error_scale,
                         regime=ev.regime, order_n=ev.order_n)


def expansion_interior(mu: float, a: float, t: float, x: float, y: float,
                       n: int = 2) -> ExpansionEval:
    """Long-time expansion with both points at distance > a from the barrier."""
    KernelQuery(a, t, x, y)
    if mu < 0:
        return _reflect_eval(mu, a, t, x, y, expansion_interior(-mu, a, t, x, y, n))
    if n < 1:
        raise DomainError("n must be at least 1")
    if t < a * a * specfun.BesselIndex(mu).t0:
        raise DomainError(f"t = {t} below a^2 t0(mu) = {a * a * specfun.BesselIndex(mu).t0}")
    if not (x > 2 * a and y > 2 * a):
        raise DomainError("interior expansion needs x, y > 2a")
    ratio = t / (x * y)
    lead = leading_term(mu, a, t, x, y)
    corr = _series_bracket(mu, ratio, n)
    return ExpansionEval(value=lead * (1.0 + corr), leading=lead, correction=corr,
                         error_scale=ratio**n, regime=Regime.LONG_INTERIOR, order_n=n)


def expansion_boundary(mu: float, a: float, t: float, x: float, y: float) -> ExpansionEval:
    """Long-time expansion with one point within a of the barrier and v >= 1."""
    q = KernelQuery(a, t, x, y).sorted()
    if mu < 0:
        return _reflect_eval(mu, a, t, x, y, expansion_boundary(-mu, a, t, x, y))
    if t < a * a * specfun.BesselIndex(mu).t0:
        raise DomainError(f"t = {t} below a^2 t0(mu)")
    if not (q.x <= 2 * a < q.y):
        raise DomainError("boundary expansion needs a < min(x, y) <= 2a < max(x, y)")
    if q.v < 1.0:
        raise DomainError(f"boundary expansion needs (x-a)(y-a)/t >= 1, got {q.v:.4g}")
    ratio = t / (x * y)
    lead = leading_term(mu, a, t, x, y)
    corr = (1.0 - 4.0 * mu * mu) / 8.0 * ratio
    return ExpansionEval(value=lead * (1.0 + corr), leading=lead, correction=corr,
                         error_scale=ratio**2, regime=Regime.LONG_BOUNDARY_TIGHT, order_n=2)


def evaluate_asymptotic(mu: float, a: float, t: float, x: float, y: float,
                        n: int = 2, u_floor: float = 10.0) -> ExpansionEval:
    """Asymptotic value of the killed kernel for large xy/t, by regime."""
    if mu < 0:
        return _reflect_eval(mu, a, t, x, y, evaluate_asymptotic(-mu, a, t, x, y, n, u_floor))
    regime = classify_regime(mu, a, t, x, y, u_floor)
    if regime is Regime.NON_ASYMPTOTIC:
        raise DomainError("NonAsymptotic: no expansion applies here; "
                          "use hunt_kernel or the Monte Carlo estimator")
    if regime is Regime.LONG_INTERIOR:
        return expansion_interior(mu, a, t, x, y, n)
    if regime is Regime.LONG_BOUNDARY_TIGHT:
        return expansion_boundary(mu, a, t, x, y)
    lead = leading_term(mu, a, t, x, y)
    scale = t / (a * a) if regime is Regime.SHORT_TIME else t / (x * y)
    return ExpansionEval(value=lead, leading=lead, correction=0.0, error_scale=scale,
                         regime=regime, order_n=1)


# --- scaling, bracket, envelope ----------------------------------------------

def rescale(mu: float, a: float, t: float, x: float, y: float):
    """Map to unit barrier: p_a(t,x,y) = factor * p_1(t/a^2, x/a, y/a)."""
    if not a > 0:
        raise DomainError("a must be positive")
    return t / (a * a), x / a, y / a, a ** (-2.0 * mu - 2.0)


def bracket_kernel(mu: float, a: float, t: float, x: float, y: float) -> Bracket:
    """Two-sided rigorous enclosure of the killed kernel for mu >= 0.

    Compares with the mu = 1/2 process through the Girsanov density
    (R_t/x)^(mu-1/2) exp(-(mu^2-1/4)/2 int ds/R^2), with the integral
    between 0 and t/a^2 on paths that stay above a.
    """
    if mu < 0:
        raise DomainError("bracket_kernel needs mu >= 0; reflect negative orders")
    base = leading_term(mu, a, t, x, y)
    s = t / (a * a)
    expo = 0.5 * (mu * mu - 0.25) * s
    if mu >= 0.5:
        return Bracket(math.exp(-expo) * base, base, "girsanov lower / comparison upper")
    return Bracket(base, math.exp(-expo) * base, "comparison lower / girsanov upper")


def envelope_sharp(mu: float, a: float, t: float, x: float, y: float) -> float:
    """Two-sided comparison quantity for the killed kernel when xy >= t."""
    KernelQuery(a, t, x, y)
    if x * y < t:
        raise DomainError("envelope needs xy >= t")
    v = (x - a) * (y - a) / t
    return (min(1.0, v) * (x * y) ** (-mu - 0.5) / math.sqrt(t)
            * math.exp(-(x - y) ** 2 / (2.0 * t)))


# --- Hunt formula --------------------------------------------------------------

EXACT_HALF = "exact-half"


@dataclass(frozen=True)
class HuntEval:
    value: float
    free: float
    subtracted: float
    error_bound: float
    clamped: bool = False
    cancellation_digits: float = 0.0
    meta: dict = field(default_factory=dict)


def hunt_kernel_eval(mu: float, a: float, t: float, x: float, y: float,
                     q_source: Union[str, Callable[[float], float]] = EXACT_HALF,
                     spec: QuadratureSpec = DEFAULT_SPEC) -> HuntEval:
    """Killed kernel as free kernel minus the Hunt convolution."""
    from .hitting import q_half_exact

    KernelQuery(a, t, x, y)
    if isinstance(q_source, str):
        if q_source != EXACT_HALF:
            raise DomainError(f"unknown q_source {q_source!r}")
        if mu != 0.5:
            raise DomainError("exact hitting density is only available at mu = 1/2")
        q = lambda s: q_half_exact(a, x, s)  # noqa: E731
    else:
        q = q_source
    free = free_kernel(mu, t, x, y)
    r, err = hunt_integral_with_error(mu, a, t, x, y, q, spec)
    value = free - r
    digits = math.log10(free / abs(value)) if value != 0 else math.inf
    if value < 0:
        if value < -spec.rel_tol * free:
            raise CatastrophicSubtraction(
                f"free kernel {free!r} minus subtracted term {r!r} is {value!r}",
                minuend=free, subtrahend=r)
        return HuntEval(0.0, free, r, err, clamped=True, cancellation_digits=digits)
    return HuntEval(value, free, r, err, cancellation_digits=digits)


def hunt_kernel(mu: float, a: float, t: float, x: float, y: float,
                q_source: Union[str, Callable[[float], float]] = EXACT_HALF,
                spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    return hunt_kernel_eval(mu, a, t, x, y, q_source, spec).value
