"""Monte Carlo engines: shuttle simulation and the Bellman martingale tester.

Diffusions are simulated in natural scale (Y = s(X)), where the process is
driftless with volatility (s' sigma) evaluated at s^{-1}(Y); reflection is
realized by folding at 0 and s(1). That removes drift terms entirely,
including the skew behavior at density jumps, at the price of an O(sqrt(h))
hitting bias which acceptance tolerances budget explicitly.

Randomness: replicas are partitioned into fixed-size blocks; block b of a run
with seed s draws from Philox keyed by (s, b). Results therefore do not
depend on scheduling or on how many workers run the blocks, and repeated runs
with one seed reproduce bit-for-bit (reductions are numpy pairwise sums in
block order).
"""

from __future__ import annotations

import csv as _csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .bellman import (
    AdditiveBellman,
    ControlledPath,
    DiscountedBellman,
    DiscreteAdditiveBellman,
    DiscreteDiscountedBellman,
    DiscretePath,
)
from .chain import BDChain, DiscountVector, DiscreteCost, DiscreteScale
from .errors import ConfigError
from .grid import CoefficientField, ScaleDensity

__all__ = [
    "SimConfig",
    "EstimateWithCI",
    "simulate_diffusion_shuttle",
    "simulate_chain_shuttle",
    "simulate_ctmc_shuttle",
    "simulate_controlled_path",
    "simulate_chain_path",
    "MartingaleCase",
    "MartingaleCaseResult",
    "MartingaleReport",
    "martingale_test_diffusion",
    "martingale_test_chain",
]

_BLOCK = 8192
_COMPACT_EVERY = 512  # steps between removals of finished lanes


@dataclass(frozen=True)
class SimConfig:
    step: float = 1e-4          # diffusion Euler step (ignored by chain runs)
    replicas: int = 10_000
    seed: int = 0
    max_time: float = 1_000.0   # censoring cap (time units / chain steps)
    threads: int = 1

    def __post_init__(self):
        if self.step <= 0.0 or self.replicas < 1 or self.max_time <= 0.0:
            raise ConfigError("invalid simulation configuration")


@dataclass(frozen=True)
class EstimateWithCI:
    """Monte Carlo estimate with its standard error and censoring count.

    Censored replicas (those that hit the time cap) are excluded from the
    mean and counted separately; acceptance runs require them under 1%.
    """

    mean: float
    se: float
    replicas: int
    censored: int

    @property
    def ok_for_acceptance(self) -> bool:
        total = self.replicas + self.censored
        return self.censored < 0.01 * total


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, block))))


_CELL_TABLE_FACTOR = 8


def _cell_table(edges: np.ndarray, top: float) -> np.ndarray:
    """Uniform lookup from scale position to a nearby cell index."""
    k = _CELL_TABLE_FACTOR * (edges.shape[0] - 1)
    ygrid = np.linspace(0.0, top, k + 1)
    return np.clip(np.searchsorted(edges, ygrid, side="right") - 1,
                   0, edges.shape[0] - 2).astype(np.int64)


@njit(cache=True, nogil=True, inline="always")
def _cell_of(y, edges, table, inv_step, n_cells):
    j = int(y * inv_step)
    if j >= table.shape[0]:
        j = table.shape[0] - 1
    elif j < 0:
        j = 0
    c = table[j]
    while c > 0 and y < edges[c]:
        c -= 1
    while c < n_cells - 1 and y >= edges[c + 1]:
        c += 1
    return c


@njit(cache=True, nogil=True)
def _diffusion_shuttle_kernel(rng, m, edges, table, vol, rate, h, sqh, top, max_steps):
    """Per-lane natural-scale shuttle simulation for one block."""
    n_cells = vol.shape[0]
    inv_step = table.shape[0] / top if top > 0 else 0.0
    acc_out = np.zeros(m)
    steps_out = np.zeros(m, np.int64)
    cens_out = np.zeros(m, np.bool_)
    for i in range(m):
        y = 0.0
        acc = 0.0
        going_up = True
        finished = False
        k = 0
        while k < max_steps:
            c = _cell_of(y, edges, table, inv_step, n_cells)
            acc += rate[c] * h
            y_raw = y + vol[c] * sqh * rng.standard_normal()
            k += 1
            if going_up:
                if y_raw >= top:
                    going_up = False
            elif y_raw <= 0.0:
                finished = True
            y = abs(y_raw)
            if y > top:
                y = 2.0 * top - y
                if y < 0.0:
                    y = -y
            if finished:
                break
        acc_out[i] = acc
        steps_out[i] = k
        cens_out[i] = not finished
    return acc_out, steps_out, cens_out


@njit(cache=True, nogil=True)
def _diffusion_window_kernel(rng, m, edges, table, vol, rate, h, sqh, top, steps):
    """Run lanes for a fixed window or until the top is first hit."""
    n_cells = vol.shape[0]
    inv_step = table.shape[0] / top if top > 0 else 0.0
    y_out = np.zeros(m)
    ymax_out = np.zeros(m)
    acc_out = np.zeros(m)
    hit_out = np.zeros(m, np.bool_)
    for i in range(m):
        y = 0.0
        ymax = 0.0
        acc = 0.0
        hit = False
        for _ in range(steps):
            c = _cell_of(y, edges, table, inv_step, n_cells)
            acc += rate[c] * h
            y_raw = y + vol[c] * sqh * rng.standard_normal()
            if y_raw >= top:
                hit = True
            y = abs(y_raw)
            if y > top:
                y = 2.0 * top - y
                if y < 0.0:
                    y = -y
            if hit:
                break
            if y > ymax:
                ymax = y
        y_out[i] = y
        ymax_out[i] = ymax
        acc_out[i] = acc
        hit_out[i] = hit
    return y_out, ymax_out, acc_out, hit_out


def _split_blocks(replicas: int):
    blocks = []
    start = 0
    b = 0
    while start < replicas:
        m = min(_BLOCK, replicas - start)
        blocks.append((b, m))
        start += m
        b += 1
    return blocks


def _run_blocks(worker, blocks, threads: int):
    if threads <= 1:
        return [worker(b) for b in blocks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, blocks))


def _finalize(values: np.ndarray, lengths: np.ndarray, censored: np.ndarray,
              csv_path=None) -> EstimateWithCI:
    if csv_path is not None:
        with open(csv_path, "w", newline="") as fh:
            w = _csv.writer(fh)
            w.writerow(["replica", "value", "shuttle_steps_or_time", "censored"])
            for i, (v, ln, c) in enumerate(zip(values, lengths, censored)):
                w.writerow([i, repr(float(v)), repr(float(ln)), int(c)])
    good = values[~censored]
    n = good.shape[0]
    if n == 0:
        raise ConfigError("all replicas were censored; raise max_time")
    mean = float(np.sum(good) / n)
    sd = float(np.sqrt(np.sum((good - mean) ** 2) / (n - 1))) if n > 1 else float("inf")
    return EstimateWithCI(mean=mean, se=sd / math.sqrt(n), replicas=n,
                          censored=int(np.count_nonzero(censored)))


def simulate_diffusion_shuttle(s: ScaleDensity, sigma2: CoefficientField,
                               f: CoefficientField | None = None,
                               alpha: CoefficientField | None = None,
                               config: SimConfig = SimConfig(),
                               csv_path=None) -> EstimateWithCI:
    """Estimate the expected shuttle cost, or the discounted shuttle payoff.

    Exactly one of `f` (running cost, estimates E[integral of f up to S]) and
    `alpha` (discount rate, estimates E[exp(-integral of alpha)]) is given.
    """
    if (f is None) == (alpha is None):
        raise ConfigError("give exactly one of f and alpha")
    rate = (f if f is not None else alpha)
    if rate.grid != s.grid or sigma2.grid != s.grid:
        raise ConfigError("mismatched grids")
    rate_cells = rate.values
    vol_cells = s.sprime * np.sqrt(sigma2.values)
    edges = s.edge_values
    top = s.total
    h = config.step
    sqh = math.sqrt(h)
    max_steps = int(math.ceil(config.max_time / h))

    table = _cell_table(edges, top)

    def run_block(spec):
        b, m = spec
        rng = _block_rng(config.seed, b)
        acc, steps, censored = _diffusion_shuttle_kernel(
            rng, m, edges, table, vol_cells, rate_cells, h, sqh, top, max_steps)
        values = acc if f is not None else np.exp(-acc)
        return values, steps * h, censored

    out = _run_blocks(run_block, _split_blocks(config.replicas), config.threads)
    values = np.concatenate([o[0] for o in out])
    lengths = np.concatenate([o[1] for o in out])
    censored = np.concatenate([o[2] for o in out])
    return _finalize(values, lengths, censored, csv_path)


def _chain_step(state, rng_u, p, q):
    up = rng_u < p[state]
    down = rng_u >= 1.0 - q[state]
    return state + up.astype(np.int64) - down.astype(np.int64)


def simulate_chain_shuttle(chain: BDChain, cost: DiscreteCost | None = None,
                           disc: DiscountVector | None = None,
                           config: SimConfig = SimConfig(),
                           csv_path=None) -> EstimateWithCI:
    """Exact-path shuttle simulation of a birth-death chain (no discretization bias)."""
    if (cost is None) == (disc is None):
        raise ConfigError("give exactly one of cost and disc")
    N = chain.n_top
    p, q = chain.p, chain.q
    additive = cost is not None
    per_state = cost.f if additive else disc.rho
    max_steps = int(config.max_time)

    def run_block(spec):
        b, m = spec
        rng = _block_rng(config.seed, b)
        state = np.zeros(m, dtype=np.int64)
        acc = np.zeros(m) if additive else np.ones(m)
        steps = np.zeros(m, dtype=np.int64)
        going_up = np.ones(m, dtype=bool)
        alive = np.ones(m, dtype=bool)
        k = 0
        while np.any(alive) and k < max_steps:
            u = rng.random(m)
            if additive:
                acc = np.where(alive, acc + per_state[state], acc)
            else:
                acc = np.where(alive, acc * per_state[state], acc)
            nxt = _chain_step(state, u, p, q)
            state = np.where(alive, nxt, state)
            going_up = going_up & ~(state == N)
            done = alive & ~going_up & (state == 0)
            steps = np.where(alive, steps + 1, steps)
            alive = alive & ~done
            k += 1
        return acc, steps.astype(float), alive

    out = _run_blocks(run_block, _split_blocks(config.replicas), config.threads)
    values = np.concatenate([o[0] for o in out])
    lengths = np.concatenate([o[1] for o in out])
    censored = np.concatenate([o[2] for o in out])
    return _finalize(values, lengths, censored, csv_path)


def simulate_ctmc_shuttle(lam, mu, f=None, alpha=None,
                          config: SimConfig = SimConfig(),
                          csv_path=None) -> EstimateWithCI:
    """Continuous-time birth-death shuttle with exponential holding times."""
    lam = np.asarray(lam, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if (f is None) == (alpha is None):
        raise ConfigError("give exactly one of f and alpha")
    total = lam + mu
    if np.any(total <= 0.0):
        raise ConfigError("zero total rate at a state")
    N = lam.shape[0] - 1
    p_up = lam / total
    additive = f is not None
    per_state = np.asarray(f if additive else alpha, dtype=float)

    def run_block(spec):
        b, m = spec
        rng = _block_rng(config.seed, b)
        state = np.zeros(m, dtype=np.int64)
        acc = np.zeros(m)
        t = np.zeros(m)
        going_up = np.ones(m, dtype=bool)
        alive = np.ones(m, dtype=bool)
        while np.any(alive):
            hold = rng.exponential(1.0, m) / total[state]
            acc = np.where(alive, acc + per_state[state] * hold, acc)
            t = np.where(alive, t + hold, t)
            up = rng.random(m) < p_up[state]
            nxt = state + np.where(up, 1, -1).astype(np.int64)
            nxt = np.clip(nxt, 0, N)
            state = np.where(alive, nxt, state)
            going_up = going_up & ~(state == N)
            done = alive & ~going_up & (state == 0)
            censor = alive & (t >= config.max_time)
            alive = alive & ~done & ~censor
        values = acc if additive else np.exp(-acc)
        return values, t, (t >= config.max_time)

    out = _run_blocks(run_block, _split_blocks(config.replicas), config.threads)
    values = np.concatenate([o[0] for o in out])
    lengths = np.concatenate([o[1] for o in out])
    censored = np.concatenate([o[2] for o in out])
    return _finalize(values, lengths, censored, csv_path)


def simulate_controlled_path(s: ScaleDensity, sigma2: CoefficientField,
                             rate: CoefficientField, step: float, seed: int,
                             max_time: float = 100.0) -> ControlledPath:
    """One recorded diffusion path under the control s, stopping at shuttle end."""
    rng = _block_rng(seed, 0)
    edges = s.edge_values
    top = s.total
    vol_cells = s.sprime * np.sqrt(sigma2.values)
    rate_cells = rate.values
    sqh = math.sqrt(step)
    y = 0.0
    acc = 0.0
    times, xs, accs = [0.0], [0.0], [0.0]
    top_hit = None
    end = None
    k = 0
    going_up = True
    while k * step < max_time:
        cell = min(max(int(np.searchsorted(edges, y, side="right")) - 1, 0), len(edges) - 2)
        acc += rate_cells[cell] * step
        y_raw = y + vol_cells[cell] * sqh * float(rng.standard_normal())
        k += 1
        if going_up and y_raw >= top:
            going_up = False
            top_hit = k
        y = abs(y_raw)
        if y > top:
            y = 2.0 * top - y
        x = float(s.inverse(y))
        times.append(k * step)
        xs.append(x)
        accs.append(acc)
        if not going_up and y_raw <= 0.0:
            end = k
            break
    return ControlledPath(np.asarray(times), np.asarray(xs), np.asarray(accs),
                          top_hit_index=top_hit, end_index=end)


def simulate_chain_path(chain: BDChain, per_state: np.ndarray, multiplicative: bool,
                        seed: int, max_steps: int = 100_000) -> DiscretePath:
    """One recorded chain path, stopping when the shuttle completes."""
    rng = _block_rng(seed, 0)
    N = chain.n_top
    states = [0]
    acc = [1.0 if multiplicative else 0.0]
    going_up = True
    top_hit = None
    end = None
    x = 0
    for k in range(1, max_steps + 1):
        a = acc[-1] * per_state[x] if multiplicative else acc[-1] + per_state[x]
        u = rng.random()
        x = x + 1 if u < chain.p[x] else (x - 1 if u >= 1.0 - chain.q[x] else x)
        states.append(x)
        acc.append(a)
        if going_up and x == N:
            going_up = False
            top_hit = k
        if not going_up and x == 0:
            end = k
            break
    return DiscretePath(np.asarray(states), np.asarray(acc),
                        top_hit_index=top_hit, end_index=end)


# ---------------------------------------------------------------------------
# martingale testing


@dataclass(frozen=True)
class MartingaleCase:
    """One control to test: expected drift 'zero', 'positive', or 'negative'."""

    name: str
    control: object  # ScaleDensity or DiscreteScale
    expected: str


@dataclass(frozen=True)
class MartingaleCaseResult:
    name: str
    expected: str
    z: float
    mean_increment: float
    se: float
    replicas: int
    verdict: str


@dataclass(frozen=True)
class MartingaleReport:
    cases: tuple
    verdict: str

    def case(self, name: str) -> MartingaleCaseResult:
        for c in self.cases:
            if c.name == name:
                return c
        raise KeyError(name)


def _case_verdict(expected: str, z: float) -> str:
    if expected == "zero":
        return "PASS" if abs(z) < 3.0 else "FAIL"
    want_pos = expected == "positive"
    if (z > 3.0) == want_pos and abs(z) > 3.0:
        return "PASS"
    if abs(z) > 3.0:
        return "FAIL"  # significant drift of the wrong sign
    return "INCONCLUSIVE"


def _overall(case_results) -> str:
    verdicts = {c.verdict for c in case_results}
    if "FAIL" in verdicts:
        return "FAIL"
    if "INCONCLUSIVE" in verdicts:
        return "INCONCLUSIVE"
    return "PASS"


def _report(results) -> MartingaleReport:
    return MartingaleReport(cases=tuple(results), verdict=_overall(results))


def martingale_test_diffusion(kind: str, cases: list[MartingaleCase],
                              rate: CoefficientField, sigma2: CoefficientField,
                              config: SimConfig, window: float) -> MartingaleReport:
    """Estimate the Bellman process drift over a fixed window from the start.

    `kind` is 'additive' or 'discounted'. Each replica runs until the window
    elapses or the top is first hit, whichever is sooner; the tested
    increment is V(end) - V(0).
    """
    if kind not in ("additive", "discounted"):
        raise ConfigError("kind must be 'additive' or 'discounted'")
    results = []
    for case_idx, case in enumerate(cases):
        s: ScaleDensity = case.control
        ev = (AdditiveBellman(s, rate, sigma2) if kind == "additive"
              else DiscountedBellman(s, rate, sigma2))
        v0 = ev.value_at_start
        edges = s.edge_values
        topv = s.total
        vol_cells = s.sprime * np.sqrt(sigma2.values)
        rate_cells = rate.values
        h = config.step
        sqh = math.sqrt(h)
        steps = int(round(window / h))

        table = _cell_table(edges, topv)

        def run_block(spec, _ev=ev, _edges=edges, _table=table, _top=topv, _vol=vol_cells,
                      _ci=case_idx):
            b, m = spec
            rng = _block_rng(config.seed + 7919 * (_ci + 1), b)
            y, ymax, acc, hit = _diffusion_window_kernel(
                rng, m, _edges, _table, _vol, rate_cells, h, sqh, _top, steps)
            x = s.inverse(y)
            mx = np.where(hit, 1.0, s.inverse(ymax))
            vals = _ev.evaluate(x, mx, acc, ~hit)
            return vals

        out = _run_blocks(run_block, _split_blocks(config.replicas), config.threads)
        vend = np.concatenate(out)
        inc = vend - v0
        mean = float(np.mean(inc))
        se = float(np.std(inc, ddof=1) / math.sqrt(inc.shape[0]))
        z = mean / se if se > 0 else 0.0
        results.append(MartingaleCaseResult(case.name, case.expected, z, mean, se,
                                            inc.shape[0], _case_verdict(case.expected, z)))
    return _report(results)


def martingale_test_chain(kind: str, cases: list[MartingaleCase],
                          payload, config: SimConfig, window_steps: int) -> MartingaleReport:
    """Chain version of the Bellman drift test.

    `payload` is a DiscreteCost for kind='additive' or a DiscountVector for
    kind='discounted'.
    """
    if kind not in ("additive", "discounted"):
        raise ConfigError("kind must be 'additive' or 'discounted'")
    results = []
    for case_idx, case in enumerate(cases):
        scale: DiscreteScale = case.control
        chain = BDChain.from_scale(scale)
        N = chain.n_top
        if kind == "additive":
            ev = DiscreteAdditiveBellman(scale, payload)
            per_state = payload.f
        else:
            ev = DiscreteDiscountedBellman(scale, payload)
            per_state = payload.rho
        v0 = ev.value_at_start

        def run_block(spec, _ev=ev, _ci=case_idx):
            b, m = spec
            rng = _block_rng(config.seed + 104729 * (_ci + 1), b)
            state = np.zeros(m, dtype=np.int64)
            acc = np.zeros(m) if kind == "additive" else np.ones(m)
            mx = np.zeros(m, dtype=np.int64)
            alive = np.ones(m, dtype=bool)
            for _ in range(window_steps):
                if not np.any(alive):
                    break
                u = rng.random(m)
                if kind == "additive":
                    acc = np.where(alive, acc + per_state[state], acc)
                else:
                    acc = np.where(alive, acc * per_state[state], acc)
                nxt = _chain_step(state, u, chain.p, chain.q)
                state = np.where(alive, nxt, state)
                mx = np.maximum(mx, state)
                alive = alive & (state != N)
            vals = _ev.evaluate(state, mx, acc, mx < N)
            return vals

        out = _run_blocks(run_block, _split_blocks(config.replicas), config.threads)
        vend = np.concatenate(out)
        inc = vend - v0
        mean = float(np.mean(inc))
        se = float(np.std(inc, ddof=1) / math.sqrt(inc.shape[0]))
        z = mean / se if se > 0 else 0.0
        results.append(MartingaleCaseResult(case.name, case.expected, z, mean, se,
                                            inc.shape[0], _case_verdict(case.expected, z)))
    return _report(results)
