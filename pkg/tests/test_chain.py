import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shuttle_ctrl import (
    BDChain,
    ConfigError,
    DegenerateProblemError,
    DiscountVector,
    DiscreteConstraint,
    DiscreteCost,
    DiscreteScale,
    brute_force_additive,
    brute_force_discounted,
    collapse_free_edges,
    convert_ctmc,
    convert_waiting,
    discount_products_exact,
    discount_series_chain,
    discounted_hitting_formula,
    hitting_cost_exact,
    hitting_cost_formula,
    optimal_discounted_chain,
    optimal_static_chain,
    shuttle_cost_exact,
    shuttle_cost_formula,
    shuttle_payoff_formula,
)


def _random_scale(rng, n_top):
    if n_top == 1:
        return DiscreteScale(np.array([1.0]))
    return DiscreteScale(np.concatenate([[1.0], np.exp(rng.normal(0.0, 0.8, n_top - 1))]))


def test_chain_construction_and_roundtrip():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(1, 9))
        scale = _random_scale(rng, n)
        chain = BDChain.from_scale(scale)
        assert chain.n_top == n
        back = chain.to_scale()
        assert np.allclose(back.W, scale.W, rtol=1e-13)
        # scale martingale: one-step drift of s(X) vanishes at interior states
        s = scale.s_values
        for x in range(1, n):
            drift = chain.p[x] * (s[x + 1] - s[x]) + chain.q[x] * (s[x - 1] - s[x])
            assert abs(drift) <= 4 * np.finfo(float).eps * s[-1]


def test_chain_validation():
    with pytest.raises(ConfigError):
        BDChain(np.array([1.0, 0.5]), np.array([0.0, 0.5]))  # p_N != 0
    with pytest.raises(ConfigError):
        BDChain(np.array([0.6, 0.0]), np.array([0.0, 0.6]))  # rows do not sum to 1
    with pytest.raises(ConfigError):
        DiscreteScale(np.array([2.0, 1.0]))  # W_0 != 1


def test_small_shuttle_values():
    assert shuttle_cost_formula(DiscreteScale.flat(1), DiscreteCost.constant(1)) == 2.0
    assert shuttle_cost_formula(DiscreteScale.flat(2), DiscreteCost.constant(2)) == 8.0
    c = BDChain.from_scale(DiscreteScale.flat(2))
    assert shuttle_cost_exact(c, DiscreteCost.constant(2)) == pytest.approx(8.0, rel=1e-14)
    # E_0[T_2] = E_2[T_0] = 4 for the symmetric chain
    f1 = DiscreteCost.constant(2)
    assert hitting_cost_exact(c, f1, 2)[0] == pytest.approx(4.0, rel=1e-14)
    assert hitting_cost_exact(c, f1, 0)[2] == pytest.approx(4.0, rel=1e-14)


def test_asymmetric_chain_formula_equals_oracle():
    # p1 = 2/3, q1 = 1/3 corresponds to w1 = 1/2
    scale = DiscreteScale(np.array([1.0, 0.5]))
    chain = BDChain.from_scale(scale)
    assert chain.p[1] == pytest.approx(2.0 / 3.0)
    f = DiscreteCost.constant(2)
    a = shuttle_cost_formula(scale, f)
    b = shuttle_cost_exact(chain, f)
    assert a == pytest.approx(b, rel=1e-12)


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=1, max_value=10), st.integers(min_value=0, max_value=2**31))
def test_additive_formula_vs_oracle_property(n_top, seed):
    rng = np.random.default_rng(seed)
    scale = _random_scale(rng, n_top)
    chain = BDChain.from_scale(scale)
    cost = DiscreteCost(rng.uniform(0.05, 3.0, n_top + 1))
    a = shuttle_cost_formula(scale, cost)
    b = shuttle_cost_exact(chain, cost)
    assert abs(a - b) <= 1e-10 * abs(b)
    y = int(rng.integers(0, n_top + 1))
    phi = hitting_cost_exact(chain, cost, y)
    for x in range(n_top + 1):
        fa = hitting_cost_formula(x, y, scale, cost)
        assert abs(fa - phi[x]) <= 1e-10 * max(abs(phi[x]), 1.0)


def test_static_optimum_flat_family():
    for n in range(1, 7):
        sol = optimal_static_chain(DiscreteScale.flat(n), DiscreteCost.constant(n),
                                   DiscreteConstraint.bottom(n, 1))
        assert sol.value == pytest.approx(2.0 * n * n, rel=1e-14)
        assert np.allclose(sol.W_opt.W, 1.0, atol=1e-12)


def test_static_optimum_weighted_costs():
    # f = (1, 1, 9): edge costs (1, 5), value (sqrt(2) + sqrt(10))^2
    sol = optimal_static_chain(DiscreteScale.flat(2), DiscreteCost(np.array([1.0, 1.0, 9.0])),
                               DiscreteConstraint.bottom(2, 1))
    assert sol.value == pytest.approx((math.sqrt(2) + math.sqrt(10)) ** 2, rel=1e-13)
    bf = brute_force_additive(DiscreteScale.flat(2), DiscreteCost(np.array([1.0, 1.0, 9.0])),
                              DiscreteConstraint.bottom(2, 1), points=200)
    assert bf.value >= sol.value - 1e-12
    assert bf.value == pytest.approx(sol.value, rel=1e-3)


def test_static_optimum_with_fixed_interior_edge():
    # C = {0, 1} with W_1 = 2: formula value equals the oracle cost of W_opt
    s0 = DiscreteScale(np.array([1.0, 2.0, 1.0]))
    cost = DiscreteCost.constant(3)
    sol = optimal_static_chain(s0, cost, DiscreteConstraint(np.array([0, 1]), 3))
    oracle = shuttle_cost_exact(BDChain.from_scale(sol.W_opt), cost)
    assert sol.value == pytest.approx(oracle, rel=1e-13)
    assert np.array_equal(sol.W_opt.W[:2], s0.W[:2])


def test_static_degenerate_and_collapse():
    f = DiscreteCost(np.array([1.0, 0.0, 0.0, 1.0]))  # edge costs (0.5, 0, 0.5)
    with pytest.raises(DegenerateProblemError):
        optimal_static_chain(DiscreteScale.flat(3), f, DiscreteConstraint.bottom(3, 1))
    red = collapse_free_edges(DiscreteScale.flat(3), f, DiscreteConstraint.bottom(3, 1))
    assert red.s0.n_top == 2
    sol = optimal_static_chain(red.s0, red.cost, red.constraint)
    ext = red.extend(sol.W_opt.W, null_weight=1.0)
    # exact extension identity: added weight mass times the reduced cost measure
    fe = f.edge_values
    i_red = float(np.sum(2.0 * fe[fe > 0] / ext.W[fe > 0]))
    assert shuttle_cost_formula(ext, f) == pytest.approx(sol.value + 1.0 * i_red, rel=1e-13)


def test_discount_oracle_values():
    n1 = BDChain.from_scale(DiscreteScale.flat(1))
    assert discount_products_exact(n1, DiscountVector.constant(1, 1.0)).shuttle_payoff == 1.0
    assert discount_products_exact(n1, DiscountVector.constant(1, 0.9)).shuttle_payoff == \
        pytest.approx(0.81, rel=1e-15)
    r = 0.9
    n2 = BDChain.from_scale(DiscreteScale.flat(2))
    orc = discount_products_exact(n2, DiscountVector.constant(2, r))
    assert orc.d[0] == pytest.approx(r)
    assert orc.d[1] == pytest.approx(r / (2.0 - r * r), rel=1e-15)


def test_discount_oracle_vs_path_enumeration():
    # independent oracle: propagate (state, product) distributions for 40 steps
    r = 0.8
    chain = BDChain.from_scale(DiscreteScale.flat(2))
    rho = DiscountVector.constant(2, r)
    # E_0[prod_{t<T_2} rho], truncated at 40 steps (tail < (q r)^20 ~ negligible)
    probs = {0: 1.0}
    total = 0.0
    for _ in range(40):
        nxt = {}
        for x, mass in probs.items():
            mass_r = mass * r
            for x2, pr in ((x + 1, chain.p[x]), (x - 1, chain.q[x])):
                if pr == 0.0:
                    continue
                m2 = mass_r * pr
                if x2 == 2:
                    total += m2
                else:
                    nxt[x2] = nxt.get(x2, 0.0) + m2
        probs = nxt
    orc = discount_products_exact(chain, rho)
    assert orc.up_payoff(0, 2) == pytest.approx(total, abs=1e-8)


def test_series_trivialities():
    scale = DiscreteScale.flat(6)
    ser = discount_series_chain(scale, DiscountVector.constant(6, 1.0))
    assert np.all(ser.G == 1.0) and np.all(ser.Gt == 1.0)
    rho = DiscountVector(np.linspace(0.6, 0.95, 7))
    ser2 = discount_series_chain(scale, rho)
    assert ser2.G[0] == 1.0 and ser2.G[1] == 1.0
    assert ser2.Gt[6] == 1.0


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=2**31))
def test_discounted_series_vs_oracle_property(n_top, seed):
    rng = np.random.default_rng(seed)
    scale = _random_scale(rng, n_top)
    chain = BDChain.from_scale(scale)
    rho = DiscountVector(rng.uniform(0.5, 0.99, n_top + 1))
    orc = discount_products_exact(chain, rho)
    ser = discount_series_chain(scale, rho)
    a = shuttle_payoff_formula(scale, rho, ser)
    assert abs(a - orc.shuttle_payoff) <= 1e-10 * orc.shuttle_payoff
    for x in range(n_top + 1):
        for y in range(n_top + 1):
            fa = discounted_hitting_formula(x, y, scale, rho, ser)
            fb = orc.up_payoff(x, y) if x < y else (orc.down_payoff(x, y) if x > y else 1.0)
            assert abs(fa - fb) <= 1e-10 * fb


def test_discount_factor_index_reading():
    """Adopting the pair weight (W_v/W_u)(1 - rho_u rho_{u+1}).

    The printed series indexes the per-pair discount factor by the pair's
    lower element without the shift; both literal readings (squared and
    unsquared reciprocal) fail against the recurrence oracle on N = 2, while
    the shifted reading matches to machine precision. Documented outcome of
    the reading question.
    """
    rho = DiscountVector(np.array([0.9, 0.7, 0.8]))
    w1 = 1.7
    scale = DiscreteScale(np.array([1.0, w1]))
    chain = BDChain.from_scale(scale)
    orc = discount_products_exact(chain, rho)
    G2_true = rho.rho[0] * rho.rho[1] / orc.up_payoff(0, 2)  # rho_0 rho_1 G(0)/G(2)
    adopted = 1.0 + w1 * (1.0 - rho.rho[1] * rho.rho[2])
    literal_sq = 1.0 + w1 * (1.0 - rho.rho[0] * rho.rho[1])       # sigma_u^2 as defined
    literal_un = 1.0 + w1 * math.sqrt(1.0 - rho.rho[0] * rho.rho[1])  # sigma_u unsquared
    assert adopted == pytest.approx(G2_true, rel=1e-14)
    assert abs(literal_sq - G2_true) > 1e-3
    assert abs(literal_un - G2_true) > 1e-3
    ser = discount_series_chain(scale, rho)
    assert ser.G[2] == pytest.approx(adopted, rel=1e-14)


def test_discounted_optimum_small_cases():
    # undiscounted: payoff 1 for any weights
    sol = optimal_discounted_chain(DiscreteScale.flat(3), DiscountVector.constant(3, 1.0), 1)
    assert sol.value == 1.0
    # N=2, y=1, constant rho: closed form matches a fine grid search
    rho = DiscountVector.constant(2, 0.9)
    sol2 = optimal_discounted_chain(DiscreteScale.flat(2), rho, 1)
    bf = brute_force_discounted(DiscreteScale.flat(2), rho, 1, points=200)
    assert sol2.value >= bf.value - 1e-12
    assert sol2.value == pytest.approx(bf.value, rel=1e-4)
    orc = discount_products_exact(BDChain.from_scale(sol2.W_opt), rho)
    assert orc.shuttle_payoff == pytest.approx(sol2.value, rel=1e-10)
    # heterogeneous N=3 instance against a 2-d grid
    rho3 = DiscountVector(np.array([0.9, 0.8, 0.9, 0.95]))
    sol3 = optimal_discounted_chain(DiscreteScale.flat(3), rho3, 1)
    bf3 = brute_force_discounted(DiscreteScale.flat(3), rho3, 1, points=200)
    assert sol3.value >= bf3.value - 1e-12
    assert sol3.value == pytest.approx(bf3.value, rel=1e-4)
    orc3 = discount_products_exact(BDChain.from_scale(sol3.W_opt), rho3)
    assert orc3.shuttle_payoff == pytest.approx(sol3.value, rel=1e-10)


def test_discounted_optimum_oracle_equality_random():
    rng = np.random.default_rng(19)
    for _ in range(25):
        n = int(rng.integers(2, 7))
        y = int(rng.integers(1, n))
        s0 = _random_scale(rng, n)
        rho = DiscountVector(rng.uniform(0.55, 0.98, n + 1))
        sol = optimal_discounted_chain(s0, rho, y)
        orc = discount_products_exact(BDChain.from_scale(sol.W_opt), rho)
        assert orc.shuttle_payoff == pytest.approx(sol.value, rel=1e-10)
        assert np.array_equal(sol.W_opt.W[:y], s0.W[:y])


def test_discounted_degenerate():
    rho = DiscountVector(np.array([1.0, 1.0, 0.9, 1.0, 1.0]))
    with pytest.raises(DegenerateProblemError):
        optimal_discounted_chain(DiscreteScale.flat(4), rho, 3)  # kappa = 0 above y
    rho2 = DiscountVector(np.array([1.0, 1.0, 1.0, 0.9, 0.9]))
    with pytest.raises(DegenerateProblemError):
        optimal_discounted_chain(DiscreteScale.flat(4), rho2, 2)  # no discounting below y


def test_convert_waiting():
    n = 3
    stay = np.array([0.5, 0.25, 0.5, 0.0])
    scale = DiscreteScale(np.array([1.0, 2.0, 0.7]))
    chain = BDChain.from_scale(scale, eps=stay)
    cost = DiscreteCost(np.array([3.0, 1.0, 2.0, 1.0]))
    rho = DiscountVector(np.array([0.9, 0.95, 0.8, 0.9]))
    clean, cost2, rho2 = convert_waiting(chain, cost=cost, disc=rho)
    assert np.all(clean.eps == 0.0)
    assert cost2.f[0] == pytest.approx(6.0)  # f/(1-eps) at eps = 1/2, f = 3
    # undiscounted invariant: r* = 1 when r = 1
    _, _, rho_one = convert_waiting(chain, disc=DiscountVector.constant(n, 1.0))
    assert np.allclose(rho_one.rho, 1.0)
    # exact equivalence of solutions
    assert shuttle_cost_exact(chain, cost) == pytest.approx(
        shuttle_cost_exact(clean, cost2), rel=1e-12)
    assert discount_products_exact(chain, rho).shuttle_payoff == pytest.approx(
        discount_products_exact(clean, rho2).shuttle_payoff, rel=1e-12)
    # identity when there is no waiting
    plain = BDChain.from_scale(scale)
    same, cost3, _ = convert_waiting(plain, cost=cost)
    assert np.array_equal(same.p, plain.p) and np.array_equal(cost3.f, cost.f)


def test_convert_ctmc():
    lam = np.array([1.0, 1.0, 0.0])
    mu = np.array([0.0, 1.0, 1.0])
    chain, cost, disc = convert_ctmc(lam, mu, cost=DiscreteCost.constant(2),
                                     alpha=np.zeros(3))
    assert np.allclose(disc.rho, 1.0)  # no discounting
    # honest unit rates: boundary holding is Exp(1), total shuttle time 6
    assert shuttle_cost_exact(chain, cost) == pytest.approx(6.0, rel=1e-12)
    # reflection-doubled boundary rates make every state hold Exp(2): value 4
    lam2 = np.array([2.0, 1.0, 0.0])
    mu2 = np.array([0.0, 1.0, 2.0])
    chain2, cost2, _ = convert_ctmc(lam2, mu2, cost=DiscreteCost.constant(2))
    assert np.allclose(cost2.f, 0.5)
    assert shuttle_cost_exact(chain2, cost2) == pytest.approx(4.0, rel=1e-12)
    # rate 6 with discount rate 3 gives the one-jump factor 6/9... = 1/2 at total rate 6
    lam3 = np.array([2.0, 4.0, 0.0])
    mu3 = np.array([0.0, 2.0, 3.0])
    _, _, disc3 = convert_ctmc(lam3, mu3, alpha=np.array([3.0, 3.0, 3.0]))
    assert disc3.rho[1] == pytest.approx(0.5)
    with pytest.raises(ConfigError):
        convert_ctmc(np.array([1.0, 1.0]), np.array([0.0, 0.0]))


def test_brute_force_edges():
    # degenerate one-point grid pinned at the closed-form optimum
    sol = optimal_static_chain(DiscreteScale.flat(2), DiscreteCost.constant(2),
                               DiscreteConstraint.bottom(2, 1))
    w_opt = float(sol.W_opt.W[1])
    bf = brute_force_additive(DiscreteScale.flat(2), DiscreteCost.constant(2),
                              DiscreteConstraint.bottom(2, 1), points=1,
                              w_range=(w_opt, w_opt))
    assert bf.value == pytest.approx(sol.value, rel=1e-14)
    with pytest.raises(ConfigError):
        brute_force_additive(DiscreteScale.flat(8), DiscreteCost.constant(8),
                             DiscreteConstraint.bottom(8, 1), points=200)
