"""Monte Carlo simulation of Bessel processes killed at a level a.

Paths are processed in fixed-size blocks. Each block draws from its own
Philox streams keyed by ``(seed, block index, stream id)``, so results do
not depend on how blocks are spread over workers. Stream 0 drives the
path increments, stream 1 the bridge-crossing tests and stream 2 the
crossing times; increments are drawn for every path in the block at
every step, so switching the bridge test on or off leaves each path's
trajectory unchanged up to its death.
"""

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetExceeded, DomainError
from .kernels import free_kernel_array


class Scheme(str, enum.Enum):
    EXACT = "ExactSquaredBessel"
    EULER = "EulerSde"


@dataclass(frozen=True)
class McConfig:
    paths: int
    step: float
    seed: int = 0
    scheme: Scheme = Scheme.EXACT
    bridge_correction: bool = True
    bins: Optional[Sequence[float]] = None
    budget: float = 5e10  # max path-steps per run
    block_size: int = 1 << 16
    workers: int = 1

    def __post_init__(self):
        if self.paths < 1:
            raise DomainError("paths must be at least 1")
        if not self.step > 0:
            raise DomainError("step must be positive")
        if self.block_size < 1:
            raise DomainError("block_size must be at least 1")
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.bins is not None:
            edges = np.asarray(self.bins, dtype=float)
            if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
                raise DomainError("bin edges must be strictly increasing")
            object.__setattr__(self, "bins", tuple(float(e) for e in edges))


@dataclass
class SimulationResult:
    terminal: np.ndarray  # R_t for survivors, nan for killed paths
    alive: np.ndarray
    hit_times: np.ndarray  # T_a for killed paths, nan for survivors
    horizon: float
    n_steps: int

    @property
    def paths(self) -> int:
        return self.alive.size

    @property
    def kill_fraction(self) -> float:
        return float(np.count_nonzero(~self.alive)) / self.paths


@dataclass
class DensityEstimate:
    bin_edges: np.ndarray
    values: np.ndarray
    std_errors: np.ndarray
    counts: np.ndarray
    kill_fraction: float
    meta: dict = field(default_factory=dict)

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def bin_lo(self) -> np.ndarray:
        return self.bin_edges[:-1]

    @property
    def bin_hi(self) -> np.ndarray:
        return self.bin_edges[1:]


def _streams(seed, block):
    key = int(seed) & 0xFFFFFFFFFFFFFFFF
    return [np.random.Generator(np.random.Philox(np.random.SeedSequence([key, block, k])))
            for k in range(3)]


def _bridge_crossing_times(rng, r0, r1, a, dt):
    """Sample the time a Brownian bridge from r0 to r1 over dt first hits a.

    Under w = 1/s - 1/dt the hitting-time law becomes a generalised inverse
    Gaussian with index 1/2, whose reciprocal is Wald(dt*|r0-a|/|r1-a|, (r0-a)^2).
    """
    d0 = np.maximum(r0 - a, 1e-300)
    d1 = np.maximum(np.abs(r1 - a), 1e-12)
    v = rng.wald(dt * d0 / d1, d0 * d0)
    return 1.0 / (1.0 / v + 1.0 / dt)


def _simulate_block(mu, x0, a, t, step, scheme, bridge, seed, block, n):
    g_inc, g_bridge, g_time = _streams(seed, block)
    n_steps = max(1, int(math.ceil(t / step - 1e-9)))
    dt = t / n_steps
    sqrt_dt = math.sqrt(dt)
    delta = 2.0 * mu + 2.0
    drift = (2.0 * mu + 1.0) / 2.0

    r = np.full(n, float(x0))
    alive = np.ones(n, dtype=bool)
    hit = np.full(n, np.nan)

    for i in range(n_steps):
        # Full-block draws keep every path's noise independent of the others' fate.
        if scheme is Scheme.EXACT:
            if delta > 1.0:
                z = g_inc.standard_normal(n)
                chi = (2.0 * g_inc.standard_gamma(0.5 * (delta - 1.0), n)
                       if delta > 1.0 + 1e-15 else np.zeros(n))
            else:
                lam = np.where(alive, r * r / dt, 0.0)
                chi = 2.0 * g_inc.standard_gamma(0.5 * delta + g_inc.poisson(0.5 * lam))
        else:
            z = g_inc.standard_normal(n)
        u = g_bridge.random(n) if bridge else None

        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        r0 = r[idx]
        if scheme is Scheme.EXACT:
            if delta > 1.0:
                r1 = sqrt_dt * np.sqrt((z[idx] + r0 / sqrt_dt) ** 2 + chi[idx])
            else:
                r1 = sqrt_dt * np.sqrt(chi[idx])
        else:
            r1 = r0 + drift / r0 * dt + sqrt_dt * z[idx]

        killed = r1 <= a
        if bridge:
            above = ~killed
            p_cross = np.zeros(idx.size)
            p_cross[above] = np.exp(-2.0 * (r0[above] - a) * (r1[above] - a) / dt)
            killed |= u[idx] < p_cross
        if killed.any():
            kidx = idx[killed]
            hit[kidx] = i * dt + _bridge_crossing_times(g_time, r0[killed], r1[killed], a, dt)
            alive[kidx] = False
            r[kidx] = np.nan
        keep = ~killed
        r[idx[keep]] = r1[keep]

    return r, alive, hit, n_steps


def _check_supported(mu, x0, a, t, cfg):
    if mu <= -1:
        raise DomainError("mu <= -1 is not supported: squared Bessel dimension 2(mu+1) <= 0")
    if not (a > 0 and x0 > a and t > 0):
        raise DomainError("need a > 0, x0 > a and t > 0")
    n_steps = max(1, int(math.ceil(t / cfg.step - 1e-9)))
    if cfg.paths * n_steps > cfg.budget:
        raise BudgetExceeded(f"{cfg.paths} paths x {n_steps} steps exceeds budget {cfg.budget:g}")


def _blocks(cfg):
    n_blocks = (cfg.paths + cfg.block_size - 1) // cfg.block_size
    for b in range(n_blocks):
        yield b, min(cfg.block_size, cfg.paths - b * cfg.block_size)


def _run_block(args):
    return _simulate_block(*args)


def simulate_paths(mu: float, x0: float, a: float, t: float, cfg: McConfig) -> SimulationResult:
    """Simulate ``cfg.paths`` paths of BES(mu) from x0 up to time t, killed at a."""
    _check_supported(mu, x0, a, t, cfg)
    jobs = [(mu, x0, a, t, cfg.step, cfg.scheme, cfg.bridge_correction, cfg.seed, b, n)
            for b, n in _blocks(cfg)]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_run_block, jobs))
    else:
        parts = [_run_block(j) for j in jobs]
    return SimulationResult(
        terminal=np.concatenate([p[0] for p in parts]),
        alive=np.concatenate([p[1] for p in parts]),
        hit_times=np.concatenate([p[2] for p in parts]),
        horizon=t,
        n_steps=parts[0][3],
    )


def default_kernel_bins(x0, a, t, n_bins=64):
    return np.geomspace(a, a + 8.0 * math.sqrt(t) + abs(x0 - a), n_bins + 1)


def default_hitting_bins(horizon, n_bins=64):
    return np.linspace(0.0, horizon, n_bins + 1)


def _meta(mu, x0, a, t, cfg, sim, **extra):
    conf = asdict(cfg)
    conf["scheme"] = cfg.scheme.value
    out = {"mu": mu, "x0": x0, "a": a, "t": t, "config": conf,
           "effective_paths": sim.paths, "n_steps": sim.n_steps}
    out.update(extra)
    return out


def measure_mass(mu, lo, hi):
    """int_lo^hi y^(2 mu + 1) dy."""
    e = 2.0 * mu + 2.0
    return (np.asarray(hi, float) ** e - np.asarray(lo, float) ** e) / e


def _binned(counts, paths, widths):
    counts = counts.astype(float)
    values = counts / (paths * widths)
    std = np.sqrt(counts * (1.0 - counts / paths)) / (paths * widths)
    # Empty bins: report the scale of a single event instead of zero.
    std = np.where(counts > 0, std, 1.0 / (paths * widths))
    return values, std


def kernel_estimate_from(sim: SimulationResult, mu, x0, a, cfg, bins=None) -> DensityEstimate:
    edges = np.asarray(bins if bins is not None else
                       (cfg.bins if cfg.bins is not None else
                        default_kernel_bins(x0, a, sim.horizon)), dtype=float)
    if edges[0] < a:
        raise DomainError("first bin edge must be at or above a")
    survivors = sim.terminal[sim.alive]
    counts, _ = np.histogram(survivors, bins=edges)
    values, std = _binned(counts, sim.paths, measure_mass(mu, edges[:-1], edges[1:]))
    outside = survivors.size - int(counts.sum())
    return DensityEstimate(edges, values, std, counts, sim.kill_fraction,
                           _meta(mu, x0, a, sim.horizon, cfg, sim, survivors_outside_bins=outside))


def hitting_estimate_from(sim: SimulationResult, mu, x0, a, cfg, bins=None) -> DensityEstimate:
    edges = np.asarray(bins if bins is not None else
                       (cfg.bins if cfg.bins is not None else
                        default_hitting_bins(sim.horizon)), dtype=float)
    times = sim.hit_times[~sim.alive]
    counts, _ = np.histogram(times, bins=edges)
    values, std = _binned(counts, sim.paths, np.diff(edges))
    return DensityEstimate(edges, values, std, counts, sim.kill_fraction,
                           _meta(mu, x0, a, sim.horizon, cfg, sim))


def estimate_kernel_mc(mu: float, x0: float, a: float, t: float, cfg: McConfig) -> DensityEstimate:
    """Binned killed-kernel estimate relative to y^(2 mu + 1) dy."""
    sim = simulate_paths(mu, x0, a, t, cfg)
    return kernel_estimate_from(sim, mu, x0, a, cfg)


def estimate_hitting_mc(mu: float, x0: float, a: float, horizon: float,
                        cfg: McConfig) -> DensityEstimate:
    """Binned density of T_a on (0, horizon], normalised per simulated path."""
    sim = simulate_paths(mu, x0, a, horizon, cfg)
    return hitting_estimate_from(sim, mu, x0, a, cfg)


@dataclass
class HuntEstimate:
    t: np.ndarray
    y: np.ndarray
    values: np.ndarray  # killed kernel estimates
    std_errors: np.ndarray
    free: np.ndarray
    subtracted: np.ndarray
    truncation_bound: np.ndarray  # worst-case bias from stopping at sim_horizon
    meta: dict = field(default_factory=dict)


def estimate_hunt_mc(mu: float, x0: float, a: float, t, ys, cfg: McConfig,
                     sim_horizon: Optional[float] = None) -> HuntEstimate:
    """Killed kernel at (t, y) pairs as p(t,x0,y) - E[p(t - T_a, a, y); T_a < t].

    Only hitting times are simulated, so this works where a binned
    estimate would see no paths at all. ``t`` broadcasts against ``ys``.
    Simulating to a horizon shorter than t leaves out later hits; the
    bound on that omission is P(T_a > horizon) times the largest weight
    over the omitted times.
    """
    ts, ys = np.broadcast_arrays(np.atleast_1d(np.asarray(t, dtype=float)),
                                 np.atleast_1d(np.asarray(ys, dtype=float)))
    t_max = float(ts.max())
    h = t_max if sim_horizon is None else min(float(sim_horizon), t_max)
    sim = simulate_paths(mu, x0, a, h, cfg)
    times = sim.hit_times[~sim.alive]
    n = sim.paths
    free = free_kernel_array(mu, ts, x0, ys)
    values = np.empty(ys.size)
    std = np.empty(ys.size)
    sub = np.empty(ys.size)
    bound = np.zeros(ys.size)
    alive_frac = 1.0 - sim.kill_fraction
    for j, (tj, y) in enumerate(zip(ts, ys)):
        w = free_kernel_array(mu, tj - times, a, y)  # zero for T >= tj
        mean = math.fsum(w) / n
        var = (math.fsum(w * w) / n - mean * mean) * n / max(n - 1, 1)
        sub[j] = mean
        values[j] = free[j] - mean
        std[j] = math.sqrt(max(var, 0.0) / n)
        if h < tj:
            grid = np.linspace(h, tj, 4001)[:-1]
            bound[j] = alive_frac * float(np.max(free_kernel_array(mu, tj - grid, a, y)))
    return HuntEstimate(ts.copy(), ys.copy(), values, std, free, sub, bound,
                        _meta(mu, x0, a, t_max, cfg, sim, sim_horizon=h))
