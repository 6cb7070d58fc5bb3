"""Cumulative quadrature on the half-point refinement of a cell grid.

Series iterations in the discounted solver integrate continuous integrands
against per-cell-constant weights. Columns are held at the 2n+1 half-cell
points; each half-interval is integrated with the quadratic through the
cell's three points (the cumulative-Simpson subinterval rule), which is
fourth-order inside every cell and never straddles a coefficient jump.
"""

from __future__ import annotations

import numpy as np


def refined_points(n_cells: int) -> np.ndarray:
    """The 2*n_cells + 1 half-cell points of the unit interval."""
    return np.linspace(0.0, 1.0, 2 * n_cells + 1)


def cum_up(values: np.ndarray, cell_weight: np.ndarray, cell_width: float) -> np.ndarray:
    """Cumulative integral C(x_k) = int_0^{x_k} w(u) v(u) du on refined points.

    `values` has length 2n+1; `cell_weight` has length n and is constant on
    each cell.
    """
    n = cell_weight.shape[0]
    v0 = values[0:-1:2]
    vm = values[1::2]
    v1 = values[2::2]
    half = cell_width / 24.0  # (h/2) / 12
    inc = np.empty(2 * n)
    inc[0::2] = cell_weight * half * (5.0 * v0 + 8.0 * vm - v1)
    inc[1::2] = cell_weight * half * (-v0 + 8.0 * vm + 5.0 * v1)
    out = np.empty(2 * n + 1)
    out[0] = 0.0
    np.cumsum(inc, out=out[1:])
    return out


def cum_down(values: np.ndarray, cell_weight: np.ndarray, cell_width: float) -> np.ndarray:
    """Tail integral D(x_k) = int_{x_k}^1 w(u) v(u) du on refined points."""
    c = cum_up(values, cell_weight, cell_width)
    return c[-1] - c
