"""Bellman (conditional-optimal-payoff) processes for the dynamic problems.

The dynamic problems freeze the control at each level when it is first
visited, so the conditional optimal payoff at time t depends on the state,
the running maximum, and the accrued cost only. The evaluators here map those
three arrays to Bellman values; path wrappers and the Monte Carlo martingale
tester build on them.

Before the top has been reached the value combines the static optimum
constrained below the running maximum with the expected budget already spent;
after the top it is the accrued cost plus the frozen downward hitting cost.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .additive import AdditiveProblem, CostCumulatives, optimal_static
from .chain import (
    DiscountVector,
    DiscreteCost,
    DiscreteScale,
    discount_series_chain,
    optimal_discounted_chain,
)
from .discounted import SeriesTable, series_table
from .errors import ConfigError
from .grid import CoefficientField, ConstraintSet, ScaleDensity

__all__ = [
    "ControlledPath",
    "DiscretePath",
    "BellmanEvaluation",
    "AdditiveBellman",
    "DiscountedBellman",
    "DiscreteAdditiveBellman",
    "DiscreteDiscountedBellman",
    "bellman_additive",
    "bellman_discounted",
    "bellman_discrete_additive",
    "bellman_discrete_discounted",
    "dynamic_extension_additive",
]


@dataclass(frozen=True)
class ControlledPath:
    """A sampled controlled-diffusion path with its accrued cost integral.

    `accrued[k]` is the rectangle-rule integral of the running cost (or
    discount rate) over [0, times[k]]. `top_hit_index` is the first sample at
    or after the first visit to 1, `end_index` the first return to 0 after
    that (both None while not yet reached).
    """

    times: np.ndarray
    positions: np.ndarray
    accrued: np.ndarray
    top_hit_index: int | None = None
    end_index: int | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        x = np.asarray(self.positions, dtype=float)
        a = np.asarray(self.accrued, dtype=float)
        if not (t.shape == x.shape == a.shape):
            raise ConfigError("path arrays must share one length")
        if np.any(np.diff(t) <= 0.0):
            raise ConfigError("path times must be strictly increasing")
        if np.any(x < 0.0) or np.any(x > 1.0):
            raise ConfigError("path positions must lie in [0,1]")
        if np.any(np.diff(a) < -1e-12):
            raise ConfigError("accrued cost must be nondecreasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "positions", x)
        object.__setattr__(self, "accrued", a)

    @property
    def running_max(self) -> np.ndarray:
        return np.maximum.accumulate(self.positions)


@dataclass(frozen=True)
class DiscretePath:
    """A birth-death path: states at t = 0..T and the running cost sums.

    `accrued[t]` is the sum of f(X_u) for u < t (or the product of rho for the
    discounted problem, stored as is).
    """

    states: np.ndarray
    accrued: np.ndarray
    top_hit_index: int | None = None
    end_index: int | None = None

    def __post_init__(self):
        s = np.asarray(self.states, dtype=np.int64)
        a = np.asarray(self.accrued, dtype=float)
        if s.shape != a.shape:
            raise ConfigError("path arrays must share one length")
        if np.any(np.abs(np.diff(s)) > 1):
            raise ConfigError("a birth-death path moves by at most one state per step")
        object.__setattr__(self, "states", s)
        object.__setattr__(self, "accrued", a)

    @property
    def running_max(self) -> np.ndarray:
        return np.maximum.accumulate(self.states)


@dataclass(frozen=True)
class BellmanEvaluation:
    times: np.ndarray
    values: np.ndarray


class AdditiveBellman:
    """Bellman values of the dynamic running-cost problem under one control."""

    def __init__(self, s0: ScaleDensity, f: CoefficientField, sigma2: CoefficientField):
        self.s0 = s0
        self.f = f
        self.sigma2 = sigma2
        self.cums = CostCumulatives(s0, f, sigma2)
        g = s0.grid
        h = g.cell_width
        j_density = np.sqrt(2.0 * f.values / sigma2.values)
        self._j_density = j_density
        self._j_suffix = np.concatenate([np.cumsum((j_density * h)[::-1])[::-1], [0.0]])
        self.value_at_start = float(self.static_value(0.0))

    def free_cost_tail(self, m) -> np.ndarray:
        """J([m, 1]), the free-region integral of sqrt(2 f / sigma^2)."""
        m = np.asarray(m, dtype=float)
        g = self.s0.grid
        i = g.cell_of(m)
        return self._j_suffix[i] - self._j_density[i] * (m - g.edges[i])

    def static_value(self, m) -> np.ndarray:
        """Optimal total cost when the density is frozen on [0, m)."""
        s0m = self.s0.at(m)
        im = self.cums.F(m)
        return (np.sqrt(s0m * im) + self.free_cost_tail(m)) ** 2

    def evaluate(self, x, m, accrued, before_top) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        m = np.asarray(m, dtype=float)
        accrued = np.asarray(accrued, dtype=float)
        before = self.static_value(m) - self.cums.cost_to_reach_above(0.0, x)
        after = self.cums.cost_to_reach_below(x, 0.0)
        return accrued + np.where(before_top, before, after)


class DiscountedBellman:
    """Bellman values of the dynamic discounted problem under one control."""

    def __init__(self, s0: ScaleDensity, alpha: CoefficientField,
                 sigma2: CoefficientField, tol: float = 1e-10):
        self.s0 = s0
        self.alpha = alpha
        self.sigma2 = sigma2
        self.table: SeriesTable = series_table(s0, sigma2, alpha, tol=tol)
        self._down_at_zero = float(self.table.down.at(0.0))
        self.value_at_start = float(self.best_payoff(0.0))

    def best_payoff(self, m) -> np.ndarray:
        """Optimal shuttle payoff when the density is frozen on [0, m)."""
        t = self.table
        G = t.up.at(m)
        DG = t.up.companion_at(m)
        H = t.up_adjoint.at(m)
        EH = t.up_adjoint.companion_at(m)
        A = t.suffix_rate_integral(m)
        root = np.sqrt(G * H) * np.cosh(A) + np.sqrt(np.maximum(DG * EH, 0.0)) * np.sinh(A)
        return root ** (-2.0)

    def evaluate(self, x, m, accrued, before_top) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        m = np.asarray(m, dtype=float)
        accrued = np.asarray(accrued, dtype=float)
        before = self.table.up.at(x) * self.best_payoff(m)
        after = self.table.down.at(x) / self._down_at_zero
        return np.exp(-accrued) * np.where(before_top, before, after)


class DiscreteAdditiveBellman:
    """Bellman values of the dynamic chain problem with running costs."""

    def __init__(self, s0: DiscreteScale, cost: DiscreteCost):
        N = s0.n_top
        if cost.f.shape[0] != N + 1:
            raise ConfigError("scale and cost sizes disagree")
        self.s0 = s0
        self.cost = cost
        W = s0.W
        fe = cost.edge_values
        s_prefix = np.concatenate([[0.0], np.cumsum(W)])
        i_prefix = np.concatenate([[0.0], np.cumsum(2.0 * fe / W)])
        j_suffix = np.concatenate([np.cumsum(np.sqrt(2.0 * fe)[::-1])[::-1], [0.0]])
        # optimum with edges {0..ell-1} frozen; the running max m maps to ell = max(m, 1)
        ells = np.maximum(np.arange(N + 1), 1)
        self._opt_by_max = (np.sqrt(s_prefix[ells] * i_prefix[ells]) + j_suffix[ells]) ** 2
        # expected budget spent reaching x from 0, and the frozen downward cost
        up_prefix = np.concatenate([[0.0], np.cumsum(W * i_prefix[:-1])])
        f = cost.f
        self._phi_up0 = np.concatenate([[0.0], np.cumsum(f[:-1])]) + up_prefix
        tail = np.concatenate([np.cumsum((2.0 * fe / W)[::-1])[::-1], [0.0]])
        down_terms = W * tail[1:]
        self._phi_down0 = (np.concatenate([[0.0], np.cumsum(f[1:])])
                           + np.concatenate([[0.0], np.cumsum(down_terms)]))
        self.value_at_start = float(self._opt_by_max[0])

    def evaluate(self, x, m, accrued, before_top) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        m = np.asarray(m, dtype=np.int64)
        accrued = np.asarray(accrued, dtype=float)
        before = self._opt_by_max[m] - self._phi_up0[x]
        after = self._phi_down0[x]
        return accrued + np.where(before_top, before, after)


class DiscreteDiscountedBellman:
    """Bellman values of the dynamic discounted chain problem.

    The payoff series carry state-dependent one-step discount prefixes which
    must be divided out for the one-step martingale identity to hold; with
    them the evaluator satisfies rho_x [p G*(x+1) + q G*(x-1)] = G*(x)
    exactly below the running maximum.
    """

    def __init__(self, s0: DiscreteScale, disc: DiscountVector):
        N = s0.n_top
        self.s0 = s0
        self.disc = disc
        self.series = discount_series_chain(s0, disc)
        r = disc.rho
        self._up_prefix = np.concatenate([[1.0], np.cumprod(r[:-1])])   # prod_{u<x} rho_u
        self._down_prefix = np.concatenate([[1.0], np.cumprod(r[1:])])  # prod_{1<=u<=x} rho_u
        opt = np.empty(N + 1)
        for m in range(N + 1):
            ell = max(m, 1)
            opt[m] = optimal_discounted_chain(s0, disc, ell).value
        self._opt_by_max = opt
        self.value_at_start = float(opt[0])

    def evaluate(self, x, m, accrued_product, before_top) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        m = np.asarray(m, dtype=np.int64)
        acc = np.asarray(accrued_product, dtype=float)
        s = self.series
        before = s.G[x] / self._up_prefix[x] * self._opt_by_max[m]
        after = self._down_prefix[x] * s.Gt[x] / s.Gt[0]
        return acc * np.where(before_top, before, after)


def _path_masks(n: int, top_hit_index, end_index):
    idx = np.arange(n)
    before = np.ones(n, dtype=bool) if top_hit_index is None else idx < top_hit_index
    frozen = np.minimum(idx, end_index) if end_index is not None else idx
    return before, frozen


def bellman_additive(path: ControlledPath, s0: ScaleDensity, f: CoefficientField,
                     sigma2: CoefficientField) -> BellmanEvaluation:
    ev = AdditiveBellman(s0, f, sigma2)
    before, frozen = _path_masks(path.times.shape[0], path.top_hit_index, path.end_index)
    x = path.positions[frozen]
    m = path.running_max[frozen]
    acc = path.accrued[frozen]
    return BellmanEvaluation(path.times, ev.evaluate(x, m, acc, before))


def bellman_discounted(path: ControlledPath, s0: ScaleDensity, alpha: CoefficientField,
                       sigma2: CoefficientField) -> BellmanEvaluation:
    ev = DiscountedBellman(s0, alpha, sigma2)
    before, frozen = _path_masks(path.times.shape[0], path.top_hit_index, path.end_index)
    return BellmanEvaluation(
        path.times,
        ev.evaluate(path.positions[frozen], path.running_max[frozen],
                    path.accrued[frozen], before))


def bellman_discrete_additive(path: DiscretePath, s0: DiscreteScale,
                              cost: DiscreteCost) -> BellmanEvaluation:
    ev = DiscreteAdditiveBellman(s0, cost)
    n = path.states.shape[0]
    before, frozen = _path_masks(n, path.top_hit_index, path.end_index)
    return BellmanEvaluation(
        np.arange(n, dtype=float),
        ev.evaluate(path.states[frozen], path.running_max[frozen],
                    path.accrued[frozen], before))


def bellman_discrete_discounted(path: DiscretePath, s0: DiscreteScale,
                                disc: DiscountVector) -> BellmanEvaluation:
    ev = DiscreteDiscountedBellman(s0, disc)
    n = path.states.shape[0]
    before, frozen = _path_masks(n, path.top_hit_index, path.end_index)
    return BellmanEvaluation(
        np.arange(n, dtype=float),
        ev.evaluate(path.states[frozen], path.running_max[frozen],
                    path.accrued[frozen], before))


def dynamic_extension_additive(s0: ScaleDensity, f: CoefficientField,
                               sigma2: CoefficientField, y: float) -> ScaleDensity:
    """Optimal continuation density when the running maximum sits at y.

    This is, by construction, the same code path as the static optimizer with
    the constraint [0, y): static and dynamic solutions coincide.
    """
    problem = AdditiveProblem(s0.grid, sigma2, f, s0, ConstraintSet.below(s0.grid, y))
    return optimal_static(problem).s_opt
