"""Expected additive costs of shuttle trips and the constrained static optimum.

The running-cost functional of a controlled reflected diffusion factorizes
over the scale density: the expected shuttle cost equals (total scale mass)
times (total cost measure). The constrained optimizer fixes the density on a
cell set C and minimizes the product over the free cells; the minimum is a
closed form assembled from three exact cell sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateProblemError
from .grid import (
    CoefficientField,
    ConstraintSet,
    Grid,
    ScaleDensity,
    speed_from_scale,
)

__all__ = [
    "AdditiveProblem",
    "StaticSolution",
    "ReducedAdditive",
    "min_ax_plus_b_over_x",
    "hitting_cost_up",
    "hitting_cost_down",
    "shuttle_cost",
    "optimal_static",
    "vanishing_f_reduction",
    "CostCumulatives",
]


def min_ax_plus_b_over_x(a: float, b: float) -> tuple[float, float]:
    """Minimum and minimizer of x -> a*x + b/x over x > 0, for a > 0, b >= 0.

    Returns (2*sqrt(a*b), sqrt(b/a)); for b = 0 the infimum 0 is approached
    as x -> 0 and (0.0, 0.0) is returned.
    """
    if a <= 0.0 or b < 0.0:
        raise ValueError(f"need a > 0 and b >= 0, got a={a}, b={b}")
    if b == 0.0:
        return 0.0, 0.0
    return 2.0 * math.sqrt(a * b), math.sqrt(b / a)


@dataclass(frozen=True)
class AdditiveProblem:
    """Running-cost shuttle problem: minimize E[cost accrued until the shuttle ends].

    `s0` is the reference control; the optimizer may only change the scale
    density outside the constrained cell set `constraint`.
    """

    grid: Grid
    sigma2: CoefficientField
    f: CoefficientField
    s0: ScaleDensity
    constraint: ConstraintSet

    def __post_init__(self):
        for fld, name in ((self.sigma2, "sigma^2"), (self.f, "f"), (self.s0, "s0"),
                          (self.constraint, "constraint")):
            if fld.grid != self.grid:
                raise ConfigError(f"{name} lives on a different grid")
        self.sigma2.require_positive("sigma^2")
        self.f.require_nonnegative("f")

    @classmethod
    def unconstrained(cls, sigma2: CoefficientField, f: CoefficientField) -> "AdditiveProblem":
        g = sigma2.grid
        return cls(g, sigma2, f, ScaleDensity.constant(g), ConstraintSet.empty(g))


@dataclass(frozen=True)
class StaticSolution:
    """Optimal value and control of the constrained static problem."""

    value: float
    s_opt: ScaleDensity
    s0_on_C: float
    cost_measure_on_C: float
    free_cost_integral: float  # J(C^c)
    multiplier: float          # constant relating s_opt' to sqrt(2f/sigma^2) off C


class CostCumulatives:
    """Exact piecewise-linear/quadratic cumulatives of one (s, f, sigma^2) triple.

    Provides the building blocks every additive evaluation needs: the scale
    cumulative, the cost measure F(x) = int_0^x f m' du, and the two hitting
    cost primitives. All evaluators accept scalars or arrays.
    """

    def __init__(self, s: ScaleDensity, f: CoefficientField, sigma2: CoefficientField):
        grid = s.grid
        if f.grid != grid or sigma2.grid != grid:
            raise ConfigError("mismatched grids in cost cumulatives")
        f.require_nonnegative("f")
        self.grid = grid
        self.s = s
        mprime = speed_from_scale(s, sigma2).mprime
        self.fm = f.values * mprime                       # density of the cost measure
        h = grid.cell_width
        self.F_edges = np.concatenate([[0.0], np.cumsum(self.fm * h)])
        self.total_cost_measure = float(self.F_edges[-1])
        # per-cell integral of F(v) s'(v) dv, exact since F is linear in a cell
        mid_F = 0.5 * (self.F_edges[:-1] + self.F_edges[1:])
        self.phi_up_edges = np.concatenate([[0.0], np.cumsum(s.sprime * mid_F * h)])

    def F(self, x) -> np.ndarray:
        """Cost measure of [0, x]."""
        x = np.asarray(x, dtype=float)
        i = self.grid.cell_of(x)
        return self.F_edges[i] + self.fm[i] * (x - self.grid.edges[i])

    def int_F_sprime(self, a, b) -> np.ndarray:
        """int_a^b F(v) s'(v) dv, exact, for 0 <= a <= b <= 1 (elementwise)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return self._cum(b) - self._cum(a)

    def _cum(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        i = self.grid.cell_of(x)
        left = self.grid.edges[i]
        dx = x - left
        # within-cell piece: F linear, midpoint exact
        mid_val = self.F_edges[i] + self.fm[i] * 0.5 * dx
        return self.phi_up_edges[i] + self.s.sprime[i] * dx * mid_val

    def cost_to_reach_above(self, x, y) -> np.ndarray:
        """Expected cost accrued from x until first hitting y >= x."""
        return self.int_F_sprime(x, y)

    def cost_to_reach_below(self, x, y) -> np.ndarray:
        """Expected cost accrued from x until first hitting y <= x."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        span = self.s.at(x) - self.s.at(y)
        return self.total_cost_measure * span - self.int_F_sprime(y, x)


def hitting_cost_up(x: float, y: float, s: ScaleDensity, f: CoefficientField,
                    sigma2: CoefficientField) -> float:
    """Expected running cost from x until the first visit to y, for x <= y."""
    if not (0.0 <= x <= y <= 1.0):
        raise ConfigError(f"need 0 <= x <= y <= 1 (got x={x}, y={y}); "
                          "use hitting_cost_down for x above y")
    return float(CostCumulatives(s, f, sigma2).cost_to_reach_above(x, y))


def hitting_cost_down(x: float, y: float, s: ScaleDensity, f: CoefficientField,
                      sigma2: CoefficientField) -> float:
    """Expected running cost from x until the first visit to y, for y <= x."""
    if not (0.0 <= y <= x <= 1.0):
        raise ConfigError(f"need 0 <= y <= x <= 1 (got x={x}, y={y}); "
                          "use hitting_cost_up for x below y")
    return float(CostCumulatives(s, f, sigma2).cost_to_reach_below(x, y))


def shuttle_cost(s: ScaleDensity, f: CoefficientField, sigma2: CoefficientField) -> float:
    """Expected cost of the full shuttle (0 up to 1 and back to 0).

    Computed as the separable product s(1) * int_0^1 f m' du; agrees with the
    sum of the two hitting costs to rounding.
    """
    cums = CostCumulatives(s, f, sigma2)
    return s.total * cums.total_cost_measure


def _static_components(problem: AdditiveProblem):
    g = problem.grid
    h = g.cell_width
    ind = problem.constraint.indicator
    comp = ~ind
    sp0 = problem.s0.sprime
    fm0 = 2.0 * problem.f.values / (problem.sigma2.values * sp0)
    s0_C = float(np.sum(sp0[ind]) * h)
    I_C = float(np.sum(fm0[ind]) * h)
    free_density = np.sqrt(2.0 * problem.f.values / problem.sigma2.values)
    J_free = float(np.sum(free_density[comp]) * h)
    return ind, comp, s0_C, I_C, free_density, J_free


def optimal_static(problem: AdditiveProblem) -> StaticSolution:
    """Constrained static optimum over densities agreeing with s0 on C.

    Raises DegenerateProblemError when the cost vanishes somewhere the
    control is free, or on all of C: the infimum is then not attained by any
    strictly positive density (route through `vanishing_f_reduction`).
    """
    ind, comp, s0_C, I_C, free_density, J_free = _static_components(problem)
    if np.any((problem.f.values == 0.0) & comp):
        raise DegenerateProblemError(
            "f vanishes on free cells: the infimum is not attained; "
            "apply vanishing_f_reduction first")
    if problem.constraint.is_empty:
        multiplier = 1.0
        value = J_free * J_free
    else:
        if I_C == 0.0:
            raise DegenerateProblemError(
                "f vanishes on all of C: the multiplier sqrt(s0(C)/I(C)) is undefined; "
                "apply vanishing_f_reduction first")
        cross, multiplier = min_ax_plus_b_over_x(I_C * J_free, s0_C * J_free) \
            if J_free > 0.0 else (0.0, math.sqrt(s0_C / I_C))
        value = s0_C * I_C + cross + J_free * J_free
    sp = np.where(ind, problem.s0.sprime, multiplier * free_density)
    s_opt = ScaleDensity(problem.grid, sp)
    return StaticSolution(value=value, s_opt=s_opt, s0_on_C=s0_C,
                          cost_measure_on_C=I_C, free_cost_integral=J_free,
                          multiplier=multiplier)


@dataclass(frozen=True)
class ReducedAdditive:
    """Result of removing zero-cost cells from an additive problem.

    `problem` is the reduced instance on [0,1] (None when the original is
    trivial, i.e. f == 0 everywhere, where every control costs exactly 0).
    `extend` maps a reduced-scale density back to the original grid; the cost
    of the extension exceeds the reduced optimum by exactly (scale mass put
    on the removed cells) * (total cost measure of the reduced control), so
    the reduced optimum is the original infimum, approached as that mass
    shrinks to zero.
    """

    original: AdditiveProblem
    trivial: bool
    problem: AdditiveProblem | None
    kept: np.ndarray | None
    length: float

    def extend(self, s_reduced: ScaleDensity, null_scale: float = 1.0) -> ScaleDensity:
        if self.trivial:
            return self.original.s0
        if s_reduced.grid != self.problem.grid:
            raise ConfigError("reduced density does not match the reduced grid")
        sp = np.array(self.original.s0.sprime) * float(null_scale)
        sp[self.kept] = s_reduced.sprime / self.length
        return ScaleDensity(self.original.grid, sp)


def vanishing_f_reduction(problem: AdditiveProblem) -> ReducedAdditive:
    """Remove cells where the running cost vanishes and the control is free.

    When f vanishes on all of C, the constrained cells are removed as well
    (their fixed scale mass gets drowned by the diverging free multiplier).
    The reduced problem is rescaled to [0,1] with sigma^2 shrunk by the
    squared length ratio, which preserves all cost values exactly.
    """
    f = problem.f.values
    ind = problem.constraint.indicator
    if not np.any(f > 0.0):
        return ReducedAdditive(problem, trivial=True, problem=None, kept=None, length=0.0)
    remove = (f == 0.0) & ~ind
    if not problem.constraint.is_empty:
        I_C = float(np.sum(2.0 * f[ind] / (problem.sigma2.values[ind] * problem.s0.sprime[ind])))
        if I_C == 0.0:
            remove = remove | ind
    kept = ~remove
    n_kept = int(np.count_nonzero(kept))
    if n_kept == problem.grid.n_cells:
        return ReducedAdditive(problem, trivial=False, problem=problem,
                               kept=kept, length=1.0)
    if n_kept < 2:
        raise ConfigError("reduction leaves fewer than 2 cells; refine the grid")
    length = n_kept * problem.grid.cell_width
    rg = Grid(n_kept)
    reduced = AdditiveProblem(
        grid=rg,
        sigma2=CoefficientField(rg, problem.sigma2.values[kept] / length**2),
        f=CoefficientField(rg, f[kept]),
        s0=ScaleDensity(rg, problem.s0.sprime[kept] * length),
        constraint=ConstraintSet(rg, ind[kept]),
    )
    return ReducedAdditive(problem, trivial=False, problem=reduced, kept=kept, length=length)
