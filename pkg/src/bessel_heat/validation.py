"""Named self-check suites reporting measured maxima against thresholds."""

import itertools
import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from . import hitting, kernels, montecarlo, quadrature, specfun
from ._gk import gk_integrate

GRID_AB = (0.1, 0.5, 1.0, 2.0, 5.0)
GRID_T = (0.5, 1.0, 4.0)


@dataclass
class Check:
    name: str
    measured: float
    threshold: float
    passed: bool

    @classmethod
    def at_most(cls, name, measured, threshold):
        return cls(name, float(measured), float(threshold), bool(measured <= threshold))


def _rel(a, b):
    return abs(a - b) / abs(b)


def lemma_mu12_max_error(spec=quadrature.DEFAULT_SPEC):
    worst = 0.0
    for A, B, t in itertools.product(GRID_AB, GRID_AB, GRID_T):
        num = quadrature.integrate_singular(quadrature.SingularIntegrand(A, B, t, -1.5, -0.5), spec)
        worst = max(worst, _rel(num, quadrature.closed_mu12(A, B, t)))
    return worst


def lemma_mu32_max_error(spec=quadrature.DEFAULT_SPEC):
    worst = 0.0
    for c, d, t in itertools.product(GRID_AB, GRID_AB, GRID_T):
        num = quadrature.integrate_singular(quadrature.SingularIntegrand(c, d, t, -0.5, -0.5), spec)
        worst = max(worst, _rel(num, quadrature.closed_mu32(c, d, t)))
    return worst


def k_integral_max_error(mus=(0.0, 0.3, 0.5, 1.0, 2.7), cds=(0.5, 1.0, 4.0)):
    worst = 0.0
    for mu, c, d in itertools.product(mus, cds, cds):
        worst = max(worst, _rel(quadrature.integrate_k_family(mu, c, d),
                                quadrature.k_integral(mu, c, d)))
    return worst


def suite_specfun():
    checks = []
    z_vals = (0.1, 1.0, 2.0, 10.0, 25.0)
    err = max(_rel(specfun.bessel_i_series(0.5, z),
                   math.sqrt(2.0 / (math.pi * z)) * math.sinh(z)) for z in z_vals)
    checks.append(Check.at_most("I_1/2 series vs sinh closed form", err, 1e-14))
    err = 0.0
    for mu in np.linspace(0.0, 5.0, 11):
        sw = 30.0 + mu * mu
        lo = specfun.bessel_i_scaled(mu, sw * (1 - 1e-12))
        hi = specfun.bessel_i_scaled(mu, sw)
        err = max(err, _rel(lo, hi))
    checks.append(Check.at_most("I branch continuity at the switch", err, 1e-12))
    worst = 0.0
    for mu, z, n in itertools.product((0.0, 1.0, 2.0), (30.0, 100.0, 300.0), (1, 2, 3, 4)):
        series = specfun.bessel_i_scaled(mu, z, specfun.SeriesControl(asym_switch=1e9, max_terms=2000))
        asym, scale = specfun.bessel_i_asym(mu, z, n)
        asym_scaled = asym * math.exp(-z)
        allowed = 2.0 * scale / math.sqrt(2.0 * math.pi * z)
        if allowed > 0:
            worst = max(worst, abs(series - asym_scaled) / allowed)
    checks.append(Check.at_most("asymptotic remainder / (2 |c_n| z^-n)", worst, 1.0))
    err = max(_rel(specfun.bessel_k(0.5, z), math.sqrt(math.pi / (2 * z)) * math.exp(-z))
              for z in (0.1, 1.0, 5.0, 20.0))
    checks.append(Check.at_most("K_1/2 vs elementary form", err, 1e-12))
    bad = 0
    for mu in (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3, 2)):
        prev = Fraction(1)  # the implicit leading 1 seeds the recurrence
        for k in range(1, 11):
            c = specfun.coeff_c(mu, k)
            if c * 8 * k != prev * (4 * mu * mu - (2 * k - 1) ** 2):
                bad += 1
            prev = c
    checks.append(Check.at_most("coefficient recurrence violations", bad, 0))
    return checks


def suite_quadrature():
    return [
        Check.at_most("lemma mu12 grid max relative error", lemma_mu12_max_error(), 1e-8),
        Check.at_most("lemma mu32 grid max relative error", lemma_mu32_max_error(), 1e-8),
        Check.at_most("K integral grid max relative error", k_integral_max_error(), 1e-8),
    ]


def lemma_expo_violations(n_draws=10_000, seed=12345):
    rng = np.random.default_rng(seed)
    x = 1.0 + rng.exponential(2.0, n_draws)
    y = 1.0 + rng.exponential(2.0, n_draws)
    t = rng.exponential(2.0, n_draws) + 1e-3
    ea = np.exp(-(x - y) ** 2 / (2 * t))
    eb = np.exp(-(x + y - 2) ** 2 / (2 * t))
    v = (x - 1) * (y - 1) / t
    # Multiply out to avoid 0/0 where both exponentials underflow.
    lhs = eb * 2.0 * (x - 1) * (y - 1)
    rhs = t * ea * -np.expm1(-2.0 * v)
    bad_b = np.count_nonzero(lhs > rhs * (1 + 1e-12))
    ratio = -np.expm1(-2.0 * v)
    tight = v >= 1.0
    bad_a = np.count_nonzero((ratio[tight] < 1.0 - math.exp(-2.0) - 1e-15) | (ratio[tight] > 1.0))
    return int(bad_b), int(bad_a)


def identity_errors(n_draws=200, seed=2024):
    """Maximum deviations of the exact identities on random draws."""
    rng = np.random.default_rng(seed)
    out = {"symmetry": 0.0, "factorization": 0.0, "reflection": 0.0,
           "hunt_additivity": 0.0}
    for _ in range(n_draws):
        a = rng.uniform(0.5, 2.0)
        x, y = a + rng.exponential(2.0, 2) + 1e-3
        t = rng.uniform(0.05, 5.0)
        mu = rng.uniform(-2.0, 3.0)
        for f in (lambda u, v: kernels.exact_half_kernel(a, t, u, v),
                  lambda u, v: kernels.leading_term(mu, a, t, u, v),
                  lambda u, v: kernels.free_kernel(mu, t, u, v),
                  lambda u, v: kernels.envelope_sharp(abs(mu), a, t, u, v) if u * v >= t else 1.0):
            fv, fw = f(x, y), f(y, x)
            if fw > 0:
                out["symmetry"] = max(out["symmetry"], _rel(fv, fw))
        lt = kernels.leading_term(mu, a, t, x, y)
        if lt > 0:
            out["factorization"] = max(out["factorization"], _rel(
                lt, (x * y) ** (0.5 - mu) * kernels.exact_half_kernel(a, t, x, y)))
        m = -abs(mu)
        direct = kernels.reflect_index(m, a, t, x, y, kernels.leading_term)
        manual = (x * y) ** (2 * abs(mu)) * kernels.leading_term(abs(mu), a, t, x, y)
        if manual > 0:
            out["reflection"] = max(out["reflection"], _rel(direct, manual))
        free = kernels.free_kernel(0.5, t, x, y)
        if free > 1e-250:
            diff = abs(free - kernels.exact_half_r(a, t, x, y) - kernels.exact_half_kernel(a, t, x, y))
            out["hunt_additivity"] = max(out["hunt_additivity"], diff / free)
    return out


def rescale_error():
    a, t, x, y = 2.0, 4.0, 4.0, 6.0
    t1, x1, y1, factor = kernels.rescale(0.5, a, t, x, y)
    return _rel(kernels.exact_half_kernel(a, t, x, y),
                factor * kernels.exact_half_kernel(1.0, t1, x1, y1))


def chapman_kolmogorov_error(a=1.0, t=0.5, s=0.5, x=2.0, y=3.0):
    def integrand(z):
        z = np.asarray(z, dtype=float)
        return np.array([kernels.exact_half_kernel(a, t, x, zi) * kernels.exact_half_kernel(a, s, zi, y)
                         * zi * zi for zi in z])
    from ._gk import gk_integrate, gk_integrate_halfline
    near, _ = gk_integrate(integrand, a * (1 + 1e-15), 10.0, rel_tol=1e-12, abs_tol=0.0)
    far, _ = gk_integrate_halfline(integrand, 10.0, 1.0, rel_tol=1e-10, abs_tol=1e-300)
    return _rel(near + far, kernels.exact_half_kernel(a, t + s, x, y))


def suite_identities():
    ids = identity_errors()
    bad_b, bad_a = lemma_expo_violations()
    return [
        Check.at_most("symmetry max relative gap", ids["symmetry"], 1e-13),
        Check.at_most("leading-term factorization", ids["factorization"], 1e-14),
        Check.at_most("index reflection round trip", ids["reflection"], 1e-14),
        Check.at_most("rescale mu=1/2 two-scale identity", rescale_error(), 1e-14),
        Check.at_most("Hunt additivity at mu=1/2", ids["hunt_additivity"], 1e-14),
        Check.at_most("Chapman-Kolmogorov at mu=1/2", chapman_kolmogorov_error(), 1e-6),
        Check.at_most("exponential bound (boundb) violations", bad_b, 0),
        Check.at_most("exponential ratio (bounda) violations", bad_a, 0),
    ]


def hunt_half_max_error(ts=(0.25, 1.0, 4.0), xs=(1.5, 2.0, 5.0, 10.0)):
    worst = 0.0
    for t, x, y in itertools.product(ts, xs, xs):
        worst = max(worst, _rel(kernels.hunt_kernel(0.5, 1.0, t, x, y),
                                kernels.exact_half_kernel(1.0, t, x, y)))
    return worst


def suite_brackets():
    checks = []
    err = 0.0
    for t in (0.01, 0.1, 1.0, 10.0):
        for x, y in itertools.product((1.01, 1.5, 2, 3, 5, 10, 20), repeat=2):
            try:
                ev = kernels.evaluate_asymptotic(0.5, 1.0, t, x, y)
            except kernels.DomainError:
                continue
            exact = kernels.exact_half_kernel(1.0, t, x, y)
            if exact > 0:
                err = max(err, _rel(ev.value, exact))
    checks.append(Check.at_most("mu=1/2 expansion vs exact", err, 1e-12))
    outside = 0
    for mu in (0.0, 0.3, 1.0, 2.0):
        for t in (0.05, 0.2, 0.5):
            for x, y in itertools.product((1.2, 2.0, 4.0, 8.0), repeat=2):
                try:
                    ev = kernels.evaluate_asymptotic(mu, 1.0, t, x, y)
                except kernels.DomainError:
                    continue
                br = kernels.bracket_kernel(mu, 1.0, t, x, y)
                if not br.contains(ev.value, rel_slack=ev.error_scale):
                    outside += 1
    checks.append(Check.at_most("expansion outside widened bracket", outside, 0))
    checks.append(Check.at_most("Hunt formula vs exact at mu=1/2", hunt_half_max_error(), 1e-8))
    outside = 0
    for x, s in itertools.product((1.1, 2.0, 5.0, 20.0), (0.01, 0.3, 1.0, 10.0)):
        if not hitting.q_bounds(0.0, x, s).contains(hitting.q_asymptotic(0.0, x, s)[0]):
            outside += 1
    checks.append(Check.at_most("q_bounds ordering failures", outside, 0))
    return checks


def _q_half_mass(lo, hi):
    q = np.vectorize(lambda s: hitting.q_half_exact(1.0, 2.0, s) if s > 0 else 0.0)
    return gk_integrate(q, lo, hi, rel_tol=1e-12)[0]


def suite_mc(paths=100_000, step=2e-3, seed=99):
    cfg = montecarlo.McConfig(paths=paths, step=step, seed=seed)
    sim = montecarlo.simulate_paths(0.5, 2.0, 1.0, 1.0, cfg)
    est = montecarlo.hitting_estimate_from(sim, 0.5, 2.0, 1.0, cfg)
    exact = np.array([_q_half_mass(lo, hi) / (hi - lo)
                      for lo, hi in zip(est.bin_lo, est.bin_hi)])
    populated = est.counts >= 200
    z = np.abs(est.values - exact)[populated] / est.std_errors[populated]
    frac_bad = float(np.mean(z > 3.0)) if z.size else 1.0
    kf = _q_half_mass(0.0, 1.0)
    kz = abs(sim.kill_fraction - kf) / math.sqrt(kf * (1 - kf) / paths)
    return [
        Check.at_most("hitting bins beyond 3 sigma (fraction)", frac_bad, 0.05),
        Check.at_most("kill fraction deviation (sigma)", kz, 3.0),
    ]


SUITES = {
    "specfun": suite_specfun,
    "quadrature": suite_quadrature,
    "identities": suite_identities,
    "brackets": suite_brackets,
    "mc": suite_mc,
}


def run_suite(name):
    checks = SUITES[name]()
    return {"suite": name, "passed": all(c.passed for c in checks),
            "checks": [asdict(c) for c in checks]}
