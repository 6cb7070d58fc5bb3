import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shuttle_ctrl import (
    CoefficientField,
    ConfigError,
    ConstraintSet,
    DriftField,
    Grid,
    ScaleDensity,
    drift_to_scale,
    scale_to_drift,
    speed_from_scale,
)


def test_grid_basics():
    g = Grid(5)
    assert g.cell_width == 0.2
    assert g.edges[0] == 0.0 and g.edges[-1] == 1.0
    assert np.all(np.diff(g.midpoints) > 0)
    assert g.cell_of(0.0) == 0
    assert g.cell_of(1.0) == 4  # top position belongs to the last cell
    assert g.cell_of(0.2) == 1
    with pytest.raises(ConfigError):
        Grid(1)


def test_aligned_index():
    g = Grid(8)
    assert g.aligned_index(0.25) == 2
    assert g.aligned_index(1.0) == 8
    with pytest.raises(ConfigError):
        g.aligned_index(0.3)


def test_constraint_set():
    g = Grid(10)
    c = ConstraintSet.below(g, 0.5)
    assert c.indicator.sum() == 5
    assert c.measure() == pytest.approx(0.5)
    assert ConstraintSet.empty(g).is_empty
    with pytest.raises(ConfigError):
        ConstraintSet.below(g, 0.55)


def test_scale_cumulative_and_inverse():
    g = Grid(4)
    s = ScaleDensity(g, np.array([1.0, 2.0, 4.0, 1.0]))
    assert s.total == pytest.approx(2.0)
    assert s.at(0.0) == 0.0
    assert s.at(0.25) == pytest.approx(0.25)
    assert s.at(0.5) == pytest.approx(0.75)
    xs = np.linspace(0, 1, 41)
    assert np.allclose(s.inverse(s.at(xs)), xs, atol=1e-14)


def test_zero_drift_gives_flat_density():
    g = Grid(64)
    out = drift_to_scale(DriftField.constant(g, 0.0), CoefficientField.constant(g, 1.0))
    assert np.all(out.sprime == 1.0)


def test_unit_drift_matches_exponential():
    g = Grid(1000)
    out = drift_to_scale(DriftField.constant(g, 1.0), CoefficientField.constant(g, 1.0))
    # analytic closed form exp(-2x) as the oracle
    assert np.max(np.abs(out.sprime - np.exp(-2.0 * g.midpoints))) < 1e-2
    # midpoint accumulation is exact for constant drift
    assert np.max(np.abs(out.sprime - np.exp(-2.0 * g.midpoints))) < 1e-12


def test_cost_shaped_drift_gives_sqrt_density():
    # mu = -(1/2) d/dx ln sqrt(f) with f = 1 + x has the hand derivative -1/(4(1+x));
    # the induced density must be proportional to sqrt(1+x)
    g = Grid(800)
    mu = DriftField(g, -0.25 / (1.0 + g.midpoints))
    out = drift_to_scale(mu, CoefficientField.constant(g, 1.0))
    target = np.sqrt(1.0 + g.midpoints)
    ratio = out.sprime / target
    assert np.max(np.abs(ratio / ratio[0] - 1.0)) < 1e-6


def test_scale_to_drift_basics():
    g = Grid(100)
    one = CoefficientField.constant(g, 1.0)
    for c in (0.3, 1.0, 7.5):
        mu = scale_to_drift(ScaleDensity.constant(g, c), one)
        assert np.all(mu.mu == 0.0)
    mu = scale_to_drift(ScaleDensity(g, np.exp(-2.0 * g.midpoints)), one)
    assert np.max(np.abs(mu.mu - 1.0)) < 1e-10  # log-density is linear: differences exact
    # density sqrt(2 f / sigma^2) with f = e^x gives mu = -1/4 (hand differentiation)
    mu2 = scale_to_drift(ScaleDensity(g, np.sqrt(2.0 * np.exp(g.midpoints))), one)
    assert np.max(np.abs(mu2.mu + 0.25)) < 1e-10


def _roundtrip_error(n: int) -> float:
    g = Grid(n)
    one = CoefficientField.constant(g, 1.0)
    s = ScaleDensity(g, 2.0 + np.sin(2.0 * np.pi * g.midpoints))
    back = drift_to_scale(scale_to_drift(s, one), one)
    ratio = back.sprime / s.sprime
    return float(np.max(np.abs(ratio / ratio[0] - 1.0)))


def test_roundtrip_error_shrinks_with_refinement():
    e1, e2 = _roundtrip_error(200), _roundtrip_error(400)
    assert e1 < 0.05
    assert e2 < 0.6 * e1  # at least first-order convergence


def test_speed_identity_examples():
    g = Grid(16)
    one = CoefficientField.constant(g, 1.0)
    assert np.all(speed_from_scale(ScaleDensity.constant(g, 1.0), one).mprime == 2.0)
    assert np.all(speed_from_scale(ScaleDensity.constant(g, 2.0), one).mprime == 1.0)
    m = speed_from_scale(ScaleDensity.constant(g, np.sqrt(2.0)),
                         CoefficientField.constant(g, 2.0))
    assert np.allclose(m.mprime, 1.0 / np.sqrt(2.0), rtol=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(min_value=1e-3, max_value=1e3), min_size=2, max_size=30),
       st.floats(min_value=1e-3, max_value=1e3))
def test_speed_identity_property(sprime, sig2):
    g = Grid(len(sprime))
    s = ScaleDensity(g, np.asarray(sprime))
    sigma2 = CoefficientField.constant(g, sig2)
    m = speed_from_scale(s, sigma2)
    assert np.max(np.abs(m.mprime * sigma2.values * s.sprime - 2.0)) < 1e-14


def test_validation_errors():
    g = Grid(4)
    with pytest.raises(ConfigError):
        ScaleDensity(g, np.array([1.0, -1.0, 1.0, 1.0]))
    with pytest.raises(ConfigError):
        CoefficientField(g, np.array([1.0, np.inf, 1.0, 1.0]))
    with pytest.raises(ConfigError):
        CoefficientField.constant(g, -1.0).require_nonnegative("f")
    with pytest.raises(ConfigError):
        CoefficientField.constant(g, 0.0).require_positive("sigma^2")
