"""Discounted shuttle payoffs via nested-integral series, and their optimizer.

The survival factors of hitting times are ratios of monotone series built by
alternately integrating against the discount measure (alpha dm) and the scale
measure (ds). Each series carries a companion column, the derivative with
respect to the measure its outermost integral uses; maintaining companions
inside the recursion keeps every optimality formula free of divisions by
alpha and keeps first-order-condition checks well conditioned.

Four flavors are computed: value series in both directions plus the two
reversed-propagator ("adjoint") series, which reassemble hitting payoffs
across an interior split point and drive the constrained optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._cumquad import cum_down, cum_up, refined_points
from .errors import ConfigError, DegenerateProblemError, NumericalError
from .grid import CoefficientField, Grid, ScaleDensity, speed_from_scale

__all__ = [
    "SeriesColumn",
    "SeriesTable",
    "DiscountedProblem",
    "DiscountedSolution",
    "series_column",
    "series_table",
    "hitting_payoff",
    "discounted_shuttle_payoff",
    "constrained_optimal_payoff",
    "optimal_continuation_level",
    "optimal_discounted",
]

_MAX_ORDERS = 400


def _lemma_bound(sB: float, n: int) -> float:
    # (sB)^n / (n!)^2, evaluated in logs to dodge overflow
    if sB <= 0.0:
        return 0.0
    return math.exp(n * math.log(sB) - 2.0 * math.lgamma(n + 1))


def _tail_bound(sB: float, n: int) -> float:
    total = 0.0
    for k in range(n, n + 60):
        t = _lemma_bound(sB, k)
        total += t
        if t < 1e-300:
            break
    return total


@dataclass(frozen=True)
class SeriesColumn:
    """One series on the half-point grid, with its companion derivative column.

    Companion semantics by (direction, adjoint):
      up, plain:    d(value)/ds   (value' = s' * companion)
      down, plain:  -d(value)/ds  (value' = -s' * companion)
      up, adjoint:  d(value)/d(alpha dm)   (value' = alpha m' * companion)
      down, adjoint: companion is the tail scale integral of the value
                     (value' = -alpha m' * companion)
    """

    grid: Grid
    direction: str
    adjoint: bool
    points: np.ndarray
    values: np.ndarray
    companion: np.ndarray
    orders_used: int
    tail_bound: float
    terms: list[np.ndarray] | None = field(default=None, repr=False)

    def at(self, x) -> np.ndarray:
        return np.interp(np.asarray(x, dtype=float), self.points, self.values)

    def companion_at(self, x) -> np.ndarray:
        return np.interp(np.asarray(x, dtype=float), self.points, self.companion)


def series_column(s: ScaleDensity, sigma2: CoefficientField, alpha: CoefficientField,
                  direction: str = "up", adjoint: bool = False,
                  tol: float = 1e-10, keep_orders: bool = False) -> SeriesColumn:
    """Evaluate one series by the recursive double-integral update.

    Orders are added until the proven bound (s(1) B(1))^n / (n!)^2 on the
    next term falls below `tol`; the remaining tail estimate is recorded.
    """
    grid = s.grid
    if sigma2.grid != grid or alpha.grid != grid:
        raise ConfigError("series inputs live on different grids")
    alpha.require_nonnegative("alpha")
    if direction not in ("up", "down"):
        raise ConfigError(f"direction must be 'up' or 'down', got {direction!r}")
    mprime = speed_from_scale(s, sigma2).mprime
    wa = alpha.values * mprime
    ws = s.sprime
    h = grid.cell_width
    B_total = float(np.sum(wa) * h)
    if not math.isfinite(B_total):
        raise DegenerateProblemError(
            "discounting measure integral is infinite: the discounted payoff is zero")
    sB = s.total * B_total
    pts = refined_points(grid.n_cells)
    npts = pts.shape[0]

    cum = cum_up if direction == "up" else cum_down
    first_w, second_w = (ws, wa) if adjoint else (wa, ws)

    term = np.ones(npts)
    values = np.ones(npts)
    companion = np.zeros(npts)
    terms = [term] if keep_orders else None
    order = 0
    while _lemma_bound(sB, order + 1) >= tol:
        comp = cum(term, first_w, h)
        term = cum(comp, second_w, h)
        companion = companion + comp
        values = values + term
        order += 1
        if keep_orders:
            terms.append(term)
        if order > _MAX_ORDERS:
            raise NumericalError("series did not reach the tolerance within the order cap")
    return SeriesColumn(grid=grid, direction=direction, adjoint=adjoint, points=pts,
                        values=values, companion=companion, orders_used=order,
                        tail_bound=_tail_bound(sB, order + 1), terms=terms)


@dataclass(frozen=True)
class SeriesTable:
    """All four series for one (s, sigma^2, alpha) triple, plus helpers."""

    grid: Grid
    s: ScaleDensity
    sigma2: CoefficientField
    alpha: CoefficientField
    up: SeriesColumn
    down: SeriesColumn
    up_adjoint: SeriesColumn
    down_adjoint: SeriesColumn
    discount_suffix: np.ndarray  # A(x) at cell edges
    a_convention: str

    def suffix_rate_integral(self, y) -> np.ndarray:
        """A(y): integral of the local discount rate from y up to 1."""
        y = np.asarray(y, dtype=float)
        i = self.grid.cell_of(y)
        lam = self._lambda
        return self.discount_suffix[i] - lam[i] * (y - self.grid.edges[i])

    @property
    def _lambda(self) -> np.ndarray:
        if self.a_convention == "sqrt2":
            return np.sqrt(2.0 * self.alpha.values / self.sigma2.values)
        return np.sqrt(self.alpha.values / self.sigma2.values)


def series_table(s: ScaleDensity, sigma2: CoefficientField, alpha: CoefficientField,
                 tol: float = 1e-10, a_convention: str = "sqrt2") -> SeriesTable:
    if a_convention not in ("sqrt2", "unscaled"):
        raise ConfigError(f"unknown discount-integral convention {a_convention!r}")
    cols = {}
    for direction in ("up", "down"):
        for adjoint in (False, True):
            cols[(direction, adjoint)] = series_column(s, sigma2, alpha, direction,
                                                       adjoint, tol=tol)
    scale = math.sqrt(2.0) if a_convention == "sqrt2" else 1.0
    lam = scale * np.sqrt(alpha.values / sigma2.values)
    h = s.grid.cell_width
    suffix = np.concatenate([np.cumsum((lam * h)[::-1])[::-1], [0.0]])
    return SeriesTable(grid=s.grid, s=s, sigma2=sigma2, alpha=alpha,
                       up=cols[("up", False)], down=cols[("down", False)],
                       up_adjoint=cols[("up", True)], down_adjoint=cols[("down", True)],
                       discount_suffix=suffix, a_convention=a_convention)


def hitting_payoff(x: float, y: float, table: SeriesTable) -> float:
    """E_x[discount factor at the first visit to y], in (0, 1]."""
    if x <= y:
        return float(table.up.at(x) / table.up.at(y))
    return float(table.down.at(x) / table.down.at(y))


def _split_identity_brackets(table: SeriesTable, y: float) -> tuple[float, float]:
    # total up-series value reassembled across y, and the same going down
    up_val = float(table.up.at(y))
    up_dds = float(table.up.companion_at(y))
    dn_val = float(table.down.at(y))
    dn_tail = float(table.down.companion_at(y))
    adj_up = float(table.up_adjoint.at(y))
    adj_up_dmu = float(table.up_adjoint.companion_at(y))
    adj_dn = float(table.down_adjoint.at(y))
    adj_dn_tail = float(table.down_adjoint.companion_at(y))
    bracket_up = adj_dn * up_val + adj_dn_tail * up_dds
    bracket_down = adj_up * dn_val + adj_up_dmu * dn_tail
    return bracket_up, bracket_down


def discounted_shuttle_payoff(s: ScaleDensity, sigma2: CoefficientField,
                              alpha: CoefficientField, tol: float = 1e-10,
                              check: bool = True) -> float:
    """E[discount factor over the full shuttle] = product of the two hitting payoffs.

    With `check` on, the payoff is re-derived from the split-point product
    identity at three interior points and must agree to 1e-8 relative.
    """
    table = series_table(s, sigma2, alpha, tol=tol)
    payoff = 1.0 / (float(table.up.at(1.0)) * float(table.down.at(0.0)))
    if check:
        for y in (0.25, 0.5, 0.75):
            b_up, b_dn = _split_identity_brackets(table, y)
            alt = 1.0 / (b_up * b_dn)
            if abs(alt - payoff) > 1e-8 * max(payoff, 1e-300):
                raise NumericalError(
                    f"split-point payoff identity failed at y={y}: {alt} vs {payoff}")
    return payoff


@dataclass(frozen=True)
class DiscountedProblem:
    """Discounted shuttle problem constrained on [0, y)."""

    grid: Grid
    sigma2: CoefficientField
    alpha: CoefficientField
    s0: ScaleDensity
    y: float

    def __post_init__(self):
        for fld, name in ((self.sigma2, "sigma^2"), (self.alpha, "alpha"), (self.s0, "s0")):
            if fld.grid != self.grid:
                raise ConfigError(f"{name} lives on a different grid")
        self.sigma2.require_positive("sigma^2")
        self.alpha.require_nonnegative("alpha")
        if not (0.0 <= self.y < 1.0):
            raise ConfigError(f"constraint edge y must lie in [0, 1), got {self.y}")
        self.grid.aligned_index(self.y, "constraint edge")


@dataclass(frozen=True)
class DiscountedSolution:
    value: float
    s_opt: ScaleDensity
    continuation_level: float | None  # constant sigma~ s' above y (None when y = 0)
    suffix_rate_integral: float       # A(y)
    components: dict


def constrained_optimal_payoff(table: SeriesTable, y: float) -> float:
    """Best discounted shuttle payoff over controls agreeing with s below y."""
    G = float(table.up.at(y))
    DG = float(table.up.companion_at(y))
    H = float(table.up_adjoint.at(y))
    EH = float(table.up_adjoint.companion_at(y))
    A = float(table.suffix_rate_integral(y))
    root = math.sqrt(G * H) * math.cosh(A) + math.sqrt(DG * EH) * math.sinh(A)
    return root ** (-2)


def optimal_continuation_level(table: SeriesTable, y: float) -> float:
    """The constant value of sigma~(x) s'(x) above y at the optimum."""
    G = float(table.up.at(y))
    DG = float(table.up.companion_at(y))
    H = float(table.up_adjoint.at(y))
    EH = float(table.up_adjoint.companion_at(y))
    if DG <= 0.0:
        raise DegenerateProblemError(
            "no discounting below the constraint edge: the supremum is not attained")
    return math.sqrt(2.0 * G * EH / (H * DG))


def optimal_discounted(problem: DiscountedProblem, tol: float = 1e-10,
                       a_convention: str = "sqrt2") -> DiscountedSolution:
    """Constrained discounted optimum: value and the attaining density.

    Above y the optimal density keeps sigma~ s' constant; at y = 0 the level
    is immaterial (the payoff is invariant to one global constant) and the
    density sqrt(2 alpha / sigma^2) is returned.
    """
    g = problem.grid
    k = g.aligned_index(problem.y)
    alpha_v = problem.alpha.values
    if np.any(alpha_v[k:] == 0.0):
        raise DegenerateProblemError(
            "alpha vanishes on free cells: the optimal density would vanish there "
            "and the supremum is not attained")
    table = series_table(problem.s0, problem.sigma2, problem.alpha, tol=tol,
                         a_convention=a_convention)
    A_y = float(table.suffix_rate_integral(problem.y))
    shape = np.sqrt(alpha_v / problem.sigma2.values)
    if k == 0:
        value = math.cosh(A_y) ** (-2)
        s_opt = ScaleDensity(g, math.sqrt(2.0) * shape)
        level = None
    else:
        value = constrained_optimal_payoff(table, problem.y)
        level = optimal_continuation_level(table, problem.y)
        sp = np.array(problem.s0.sprime)
        sp[k:] = level * shape[k:]
        s_opt = ScaleDensity(g, sp)
    comps = {
        "up_value": float(table.up.at(problem.y)),
        "up_dds": float(table.up.companion_at(problem.y)),
        "adjoint_value": float(table.up_adjoint.at(problem.y)),
        "adjoint_dmu": float(table.up_adjoint.companion_at(problem.y)),
        "orders_used": table.up.orders_used,
        "tail_bound": table.up.tail_bound,
    }
    return DiscountedSolution(value=value, s_opt=s_opt, continuation_level=level,
                              suffix_rate_integral=A_y, components=comps)
