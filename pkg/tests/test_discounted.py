import math

import numpy as np
import pytest

from shuttle_ctrl import (
    CoefficientField,
    DegenerateProblemError,
    DiscountedProblem,
    DriftField,
    Grid,
    ScaleDensity,
    constrained_optimal_payoff,
    discounted_shuttle_payoff,
    drift_to_scale,
    hitting_payoff,
    optimal_continuation_level,
    optimal_discounted,
    series_column,
    series_table,
)
from shuttle_ctrl._cumquad import cum_up, refined_points
from shuttle_ctrl.grid import speed_from_scale


def _setup(n=2000, a=0.5):
    g = Grid(n)
    one = CoefficientField.constant(g, 1.0)
    alpha = CoefficientField.constant(g, a)
    return g, one, alpha, ScaleDensity.constant(g)


def test_cumquad_polynomials():
    # the half-cell cumulative rule integrates cubics exactly per full cell
    n = 10
    pts = refined_points(n)
    w = np.ones(n)
    for k in (0, 1, 2):
        c = cum_up(pts**k, w, 1.0 / n)
        assert np.allclose(c, pts ** (k + 1) / (k + 1), atol=1e-15)
    c3 = cum_up(pts**3, w, 1.0 / n)
    assert np.allclose(c3[: : 2], (pts**4 / 4)[: : 2], atol=1e-15)


def test_zero_discount_gives_unit_series():
    g, one, _, s = _setup(200)
    zero = CoefficientField.constant(g, 0.0)
    col = series_column(s, one, zero, "up")
    assert np.all(col.values == 1.0)
    assert hitting_payoff(0.3, 0.9, series_table(s, one, zero)) == 1.0
    assert discounted_shuttle_payoff(s, one, zero) == 1.0


def test_series_matches_cosh():
    g, one, alpha, s = _setup(2000, 0.5)
    up = series_column(s, one, alpha, "up")
    adj = series_column(s, one, alpha, "up", adjoint=True)
    x = np.linspace(0.0, 1.0, 11)
    assert np.max(np.abs(up.at(x) - np.cosh(x))) < 1e-8
    assert np.max(np.abs(adj.at(x) - np.cosh(x))) < 1e-8
    down = series_column(s, one, alpha, "down")
    assert np.max(np.abs(down.at(x) - np.cosh(1.0 - x))) < 1e-8


def test_hitting_payoff_values():
    g, one, alpha, s = _setup()
    table = series_table(s, one, alpha)
    assert hitting_payoff(0.5, 0.5, table) == 1.0
    assert hitting_payoff(0.0, 1.0, table) == pytest.approx(1.0 / math.cosh(1.0), abs=1e-8)
    xs = np.linspace(0, 1, 9)
    for x in xs:
        v = hitting_payoff(float(x), 1.0, table)
        assert 0.0 < v <= 1.0


def test_monotonicity_and_bounds():
    g = Grid(500)
    rng = np.random.default_rng(2)
    s = ScaleDensity(g, np.exp(rng.normal(0.0, 0.5, g.n_cells)))
    sig = CoefficientField(g, rng.uniform(0.5, 2.0, g.n_cells))
    alpha = CoefficientField(g, rng.uniform(0.0, 2.0, g.n_cells))
    table = series_table(s, sig, alpha)
    assert np.all(table.up.values >= 1.0)
    assert np.all(np.diff(table.up.values) >= -1e-15)
    assert np.all(table.down.values >= 1.0)
    assert np.all(np.diff(table.down.values) <= 1e-15)


def test_truncation_bound_lemma():
    rng = np.random.default_rng(7)
    for trial in range(5):
        g = Grid(300)
        s = ScaleDensity(g, np.exp(rng.normal(0.0, 0.5, g.n_cells)))
        sig = CoefficientField(g, rng.uniform(0.5, 2.0, g.n_cells))
        alpha = CoefficientField(g, rng.uniform(0.0, 3.0, g.n_cells))
        col = series_column(s, sig, alpha, "up", keep_orders=True)
        m = speed_from_scale(s, sig).mprime
        h = g.cell_width
        B = np.concatenate([[0.0], np.cumsum(alpha.values * m * h)])
        s_edges = s.edge_values
        pts = col.points
        s_at = np.interp(pts, g.edges, s_edges)
        B_at = np.interp(pts, g.edges, B)
        for nord in range(1, min(len(col.terms), 11)):
            bound = (s_at * B_at) ** nord / math.factorial(nord) ** 2
            # 1e-12 absolute slack: near x = 0 the bound sits below quadrature noise
            assert np.all(col.terms[nord] <= bound * (1.0 + 1e-9) + 1e-12)


def test_fixed_point_residual():
    g, one, alpha, s = _setup(1000, 2.0)
    col = series_column(s, one, alpha, "up")
    m = speed_from_scale(s, one).mprime
    wa = alpha.values * m
    h = g.cell_width
    inner = cum_up(col.values, wa, h)
    outer = cum_up(inner, s.sprime, h)
    residual = np.max(np.abs(col.values - 1.0 - outer))
    assert residual < 1e-8


def test_payoff_cosh_values_and_split_identity():
    g, one, _, s = _setup()
    for a in (0.5, 2.0):
        alpha = CoefficientField.constant(g, a)
        payoff = discounted_shuttle_payoff(s, one, alpha)  # check=True runs add4-style splits
        assert payoff == pytest.approx(math.cosh(math.sqrt(2.0 * a)) ** -2, abs=1e-8)
    # nonconstant scale exercises the split identity off the symmetric case
    s1 = drift_to_scale(DriftField.constant(g, 1.0), one)
    alpha = CoefficientField.constant(g, 1.0)
    p = discounted_shuttle_payoff(s1, one, alpha)
    assert 0.0 < p < 1.0


def test_optimal_discounted_unconstrained():
    g, one, alpha, s = _setup(2000, 0.5)
    sol = optimal_discounted(DiscountedProblem(g, one, alpha, s, 0.0))
    assert sol.value == pytest.approx(math.cosh(1.0) ** -2, abs=1e-10)
    assert np.allclose(sol.s_opt.sprime, 1.0)
    # alpha(u) = u: value cosh(int sqrt(2u))^-2 = cosh(2 sqrt(2)/3)^-2. Midpoint
    # sampling of the sqrt-singular integrand costs O(h^1.5) near 0, so the
    # analytic comparison gets 1e-5; the grid-consistent form is exact.
    au = CoefficientField(g, g.midpoints)
    sol2 = optimal_discounted(DiscountedProblem(g, one, au, s, 0.0))
    assert sol2.value == pytest.approx(math.cosh(2.0 * math.sqrt(2.0) / 3.0) ** -2, abs=1e-5)
    grid_a = float(np.sum(np.sqrt(2.0 * au.values)) * g.cell_width)
    assert sol2.value == pytest.approx(math.cosh(grid_a) ** -2, rel=1e-12)
    attained = discounted_shuttle_payoff(sol2.s_opt, one, au)
    assert attained == pytest.approx(sol2.value, rel=1e-6)


def test_optimal_discounted_constrained_consistency_and_dominance():
    g, one, _, _ = _setup(2000)
    alpha = CoefficientField.constant(g, 1.0)
    s0 = drift_to_scale(DriftField.constant(g, 1.0), one)
    y = 0.25
    sol = optimal_discounted(DiscountedProblem(g, one, alpha, s0, y))
    attained = discounted_shuttle_payoff(sol.s_opt, one, alpha)
    assert attained == pytest.approx(sol.value, rel=1e-6)
    k = g.aligned_index(y)
    assert np.array_equal(sol.s_opt.sprime[:k], s0.sprime[:k])
    rng = np.random.default_rng(13)
    for _ in range(50):
        sp = np.array(sol.s_opt.sprime)
        sp[k:] *= np.exp(rng.normal(0.0, 0.5, g.n_cells - k))
        worse = discounted_shuttle_payoff(ScaleDensity(g, sp), one, alpha, check=False)
        assert worse <= sol.value * (1.0 + 1e-9)


def test_first_order_condition_at_optimum():
    # with the optimal continuation, level^2 * (dG/ds) H = 2 G (dH/dmu) at and above y
    g, one, _, _ = _setup(2000)
    alpha = CoefficientField.constant(g, 1.0)
    s0 = drift_to_scale(DriftField.constant(g, 1.0), one)
    y = 0.25
    sol = optimal_discounted(DiscountedProblem(g, one, alpha, s0, y))
    table = series_table(sol.s_opt, one, alpha)
    lvl = sol.continuation_level
    for x in (0.25, 0.5, 0.75, 1.0):
        G = float(table.up.at(x))
        DG = float(table.up.companion_at(x))
        H = float(table.up_adjoint.at(x))
        EH = float(table.up_adjoint.companion_at(x))
        wron = lvl**2 * DG * H - 2.0 * G * EH
        assert abs(wron) < 1e-6 * G * H


def test_degenerate_cases():
    g, one, _, s = _setup(100)
    a = np.ones(g.n_cells)
    a[60:] = 0.0
    with pytest.raises(DegenerateProblemError):
        optimal_discounted(DiscountedProblem(g, one, CoefficientField(g, a), s, 0.5))
    b = np.ones(g.n_cells)
    b[:50] = 0.0
    with pytest.raises(DegenerateProblemError):
        optimal_discounted(DiscountedProblem(g, one, CoefficientField(g, b), s, 0.5))


def test_rate_integral_convention_flag():
    g, one, alpha, s = _setup(500, 0.5)
    normative = optimal_discounted(DiscountedProblem(g, one, alpha, s, 0.0))
    other = optimal_discounted(DiscountedProblem(g, one, alpha, s, 0.0),
                               a_convention="unscaled")
    assert normative.value == pytest.approx(math.cosh(1.0) ** -2, abs=1e-10)
    assert other.value != pytest.approx(normative.value, rel=1e-3)


def test_table_helpers_consistency():
    g, one, alpha, s = _setup(500, 0.5)
    table = series_table(s, one, alpha)
    assert constrained_optimal_payoff(table, 0.0) == pytest.approx(math.cosh(1.0) ** -2,
                                                                   abs=1e-8)
    lvl = optimal_continuation_level(table, 0.5)
    assert lvl > 0.0
