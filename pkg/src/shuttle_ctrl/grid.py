"""Uniform cell grid on [0,1] and the basic control/coefficient fields.

Everything downstream works with piecewise-constant cell values: coefficients
(sigma^2, running cost f, discount rate alpha), drifts, and scale densities.
Cumulative quantities (the scale function itself, cost measures) are then
piecewise linear and can be evaluated exactly at arbitrary positions, which
keeps the closed-form identities of the solvers exact at grid level.

All objects are immutable after construction and safe to share across
threads; arrays are stored read-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigError, NumericalError

__all__ = [
    "Grid",
    "CoefficientField",
    "DriftField",
    "ScaleDensity",
    "SpeedDensity",
    "ConstraintSet",
    "drift_to_scale",
    "scale_to_drift",
    "speed_from_scale",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


class Grid:
    """`n_cells` uniform cells covering [0,1].

    Cell i spans [edges[i], edges[i+1]] and carries one value of every field.
    """

    __slots__ = ("n_cells", "__dict__")

    def __init__(self, n_cells: int):
        n = int(n_cells)
        if n < 2:
            raise ConfigError(f"grid needs at least 2 cells, got {n}")
        self.n_cells = n

    @property
    def cell_width(self) -> float:
        return 1.0 / self.n_cells

    @cached_property
    def edges(self) -> np.ndarray:
        return _readonly(np.linspace(0.0, 1.0, self.n_cells + 1))

    @cached_property
    def midpoints(self) -> np.ndarray:
        e = self.edges
        return _readonly(0.5 * (e[:-1] + e[1:]))

    def cell_of(self, x) -> np.ndarray:
        """Cell index containing position x (x=1 maps to the last cell)."""
        idx = np.floor(np.asarray(x, dtype=float) * self.n_cells).astype(np.int64)
        return np.clip(idx, 0, self.n_cells - 1)

    def aligned_index(self, x: float, what: str = "position") -> int:
        """Index k with x == k * cell_width, rejecting unaligned positions."""
        k = x * self.n_cells
        ki = int(round(k))
        if abs(k - ki) > 1e-9 * self.n_cells or not (0 <= ki <= self.n_cells):
            raise ConfigError(f"{what} {x!r} is not aligned to the {self.n_cells}-cell grid")
        return ki

    def __eq__(self, other) -> bool:
        return isinstance(other, Grid) and other.n_cells == self.n_cells

    def __hash__(self) -> int:
        return hash(("Grid", self.n_cells))

    def __repr__(self) -> str:
        return f"Grid(n_cells={self.n_cells})"


def _check_grid_match(grid: Grid, values: np.ndarray, name: str) -> None:
    if values.shape != (grid.n_cells,):
        raise ConfigError(
            f"{name} has {values.shape[0] if values.ndim == 1 else values.shape} values, "
            f"grid has {grid.n_cells} cells"
        )


@dataclass(frozen=True)
class CoefficientField:
    """Per-cell real values of a problem coefficient (sigma^2, f, or alpha)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = _readonly(np.asarray(self.values, dtype=float))
        _check_grid_match(self.grid, v, "coefficient field")
        if not np.all(np.isfinite(v)):
            raise ConfigError("coefficient field contains non-finite values")
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "CoefficientField":
        return cls(grid, np.full(grid.n_cells, float(value)))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "CoefficientField":
        """Sample a callable at cell midpoints."""
        return cls(grid, np.asarray([fn(x) for x in grid.midpoints], dtype=float))

    def require_positive(self, name: str) -> "CoefficientField":
        if np.any(self.values <= 0.0):
            i = int(np.argmax(self.values <= 0.0))
            raise ConfigError(f"{name} must be strictly positive; cell {i} has {self.values[i]}")
        return self

    def require_nonnegative(self, name: str) -> "CoefficientField":
        if np.any(self.values < 0.0):
            i = int(np.argmax(self.values < 0.0))
            raise ConfigError(f"{name} must be nonnegative; cell {i} has {self.values[i]}")
        return self

    def at(self, x) -> np.ndarray:
        return self.values[self.grid.cell_of(x)]


@dataclass(frozen=True)
class DriftField:
    """Per-cell drift values mu (position/time units)."""

    grid: Grid
    mu: np.ndarray

    def __post_init__(self):
        v = _readonly(np.asarray(self.mu, dtype=float))
        _check_grid_match(self.grid, v, "drift field")
        if not np.all(np.isfinite(v)):
            raise ConfigError("drift field contains non-finite values")
        object.__setattr__(self, "mu", v)

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "DriftField":
        return cls(grid, np.full(grid.n_cells, float(value)))


@dataclass(frozen=True)
class ScaleDensity:
    """Positive per-cell density s' of a scale function with s(0) = 0.

    The cumulative s is piecewise linear; `at` and `inverse` evaluate it and
    its inverse exactly.
    """

    grid: Grid
    sprime: np.ndarray

    def __post_init__(self):
        v = _readonly(np.asarray(self.sprime, dtype=float))
        _check_grid_match(self.grid, v, "scale density")
        if not np.all(np.isfinite(v)) or np.any(v <= 0.0):
            raise ConfigError("scale density must be finite and strictly positive in every cell")
        object.__setattr__(self, "sprime", v)

    @classmethod
    def constant(cls, grid: Grid, value: float = 1.0) -> "ScaleDensity":
        return cls(grid, np.full(grid.n_cells, float(value)))

    @cached_property
    def edge_values(self) -> np.ndarray:
        """s at the cell edges: s(0)=0, ..., s(1)=total."""
        s = np.empty(self.grid.n_cells + 1)
        s[0] = 0.0
        np.cumsum(self.sprime * self.grid.cell_width, out=s[1:])
        return _readonly(s)

    @property
    def total(self) -> float:
        return float(self.edge_values[-1])

    def at(self, x) -> np.ndarray:
        """s(x) for positions in [0,1] (piecewise linear, exact)."""
        x = np.asarray(x, dtype=float)
        i = self.grid.cell_of(x)
        return self.edge_values[i] + self.sprime[i] * (x - self.grid.edges[i])

    def inverse(self, y) -> np.ndarray:
        """Position x with s(x) = y, for y in [0, total]."""
        y = np.asarray(y, dtype=float)
        e = self.edge_values
        i = np.clip(np.searchsorted(e, y, side="right") - 1, 0, self.grid.n_cells - 1)
        return self.grid.edges[i] + (y - e[i]) / self.sprime[i]

    def scaled(self, c: float) -> "ScaleDensity":
        return ScaleDensity(self.grid, self.sprime * float(c))

    def mass_on(self, indicator: np.ndarray) -> float:
        """Total s-mass of the cells flagged by a boolean mask."""
        return float(np.sum(self.sprime[indicator]) * self.grid.cell_width)


@dataclass(frozen=True)
class SpeedDensity:
    """Per-cell speed density m' tied to a scale density by m' sigma^2 s' = 2."""

    grid: Grid
    mprime: np.ndarray

    def __post_init__(self):
        v = _readonly(np.asarray(self.mprime, dtype=float))
        _check_grid_match(self.grid, v, "speed density")
        if not np.all(np.isfinite(v)) or np.any(v <= 0.0):
            raise ConfigError("speed density must be finite and strictly positive")
        object.__setattr__(self, "mprime", v)


@dataclass(frozen=True)
class ConstraintSet:
    """Cell-aligned membership mask of the constrained region C."""

    grid: Grid
    indicator: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        ind = np.ascontiguousarray(np.asarray(self.indicator, dtype=bool))
        if ind.shape != (self.grid.n_cells,):
            raise ConfigError("constraint indicator length does not match the grid")
        ind.setflags(write=False)
        object.__setattr__(self, "indicator", ind)

    @classmethod
    def empty(cls, grid: Grid) -> "ConstraintSet":
        return cls(grid, np.zeros(grid.n_cells, dtype=bool))

    @classmethod
    def below(cls, grid: Grid, y: float) -> "ConstraintSet":
        """C = [0, y) for a cell-aligned y."""
        k = grid.aligned_index(y, "constraint edge")
        ind = np.zeros(grid.n_cells, dtype=bool)
        ind[:k] = True
        return cls(grid, ind)

    @property
    def complement(self) -> np.ndarray:
        return ~self.indicator

    @property
    def is_empty(self) -> bool:
        return not bool(np.any(self.indicator))

    def measure(self) -> float:
        return float(np.count_nonzero(self.indicator)) * self.grid.cell_width


def drift_to_scale(mu: DriftField, sigma2: CoefficientField) -> ScaleDensity:
    """Scale density of the diffusion with the given drift.

    The density in cell i is exp(-2 * integral of mu/sigma^2 up to the cell
    midpoint), accumulated cell by cell with a half-cell closing step.
    """
    grid = mu.grid
    if sigma2.grid != grid:
        raise ConfigError("drift and sigma^2 live on different grids")
    sigma2.require_positive("sigma^2")
    ratio = mu.mu / sigma2.values
    h = grid.cell_width
    # integral of mu/sigma^2 from 0 to each midpoint
    prefix = np.concatenate([[0.0], np.cumsum(ratio[:-1])]) * h
    expo = -2.0 * (prefix + 0.5 * h * ratio)
    if not np.all(np.isfinite(expo)):
        i = int(np.argmax(~np.isfinite(expo)))
        raise NumericalError(f"drift integral overflows at cell {i}")
    sp = np.exp(expo)
    if not np.all(np.isfinite(sp)) or np.any(sp <= 0.0):
        i = int(np.argmax(~(np.isfinite(sp) & (sp > 0.0))))
        raise NumericalError(f"scale density overflows/underflows at cell {i}")
    return ScaleDensity(grid, sp)


def scale_to_drift(s: ScaleDensity, sigma2: CoefficientField) -> DriftField:
    """Drift mu = -sigma^2 (ln s')' / 2 by finite differences.

    Central differences in the interior, one-sided at the boundary cells;
    the round trip through `drift_to_scale` reproduces s up to one global
    constant and O(cell_width) error on smooth inputs.
    """
    grid = s.grid
    if sigma2.grid != grid:
        raise ConfigError("scale and sigma^2 live on different grids")
    h = grid.cell_width
    logs = np.log(s.sprime)
    d = np.empty_like(logs)
    d[1:-1] = (logs[2:] - logs[:-2]) / (2.0 * h)
    d[0] = (logs[1] - logs[0]) / h
    d[-1] = (logs[-1] - logs[-2]) / h
    return DriftField(grid, -0.5 * sigma2.values * d)


def speed_from_scale(s: ScaleDensity, sigma2: CoefficientField) -> SpeedDensity:
    """Speed density from the per-cell identity m' = 2 / (sigma^2 s')."""
    if sigma2.grid != s.grid:
        raise ConfigError("scale and sigma^2 live on different grids")
    sigma2.require_positive("sigma^2")
    return SpeedDensity(s.grid, 2.0 / (sigma2.values * s.sprime))
