"""Birth-death shuttle problems on {0,...,N}: exact oracles and closed forms.

Chains are parameterized by the discrete scale weights W (the control), with
transition probabilities recovered from the weight ratios. Every closed-form
quantity here is backed by an independent oracle: hitting costs by a
tridiagonal linear solve, discounted products by a forward recurrence, and
both optimizers by brute-force grid search over the free weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .additive import min_ax_plus_b_over_x
from .errors import ConfigError, DegenerateProblemError, NumericalError

__all__ = [
    "BDChain",
    "DiscreteScale",
    "DiscreteCost",
    "DiscountVector",
    "DiscreteConstraint",
    "hitting_cost_exact",
    "shuttle_cost_exact",
    "hitting_cost_formula",
    "shuttle_cost_formula",
    "DiscreteStaticSolution",
    "optimal_static_chain",
    "CollapsedAdditiveChain",
    "collapse_free_edges",
    "DiscountOracle",
    "discount_products_exact",
    "DiscreteSeries",
    "discount_series_chain",
    "discounted_hitting_formula",
    "shuttle_payoff_formula",
    "DiscreteDiscountedSolution",
    "optimal_discounted_chain",
    "convert_waiting",
    "convert_ctmc",
    "BruteForceResult",
    "brute_force_additive",
    "brute_force_discounted",
]


def _as_vector(x, length: int, name: str) -> np.ndarray:
    v = np.ascontiguousarray(np.asarray(x, dtype=float))
    if v.shape != (length,):
        raise ConfigError(f"{name} must have length {length}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ConfigError(f"{name} contains non-finite entries")
    v.setflags(write=False)
    return v


@dataclass(frozen=True)
class DiscreteScale:
    """Weights W_0..W_{N-1} with W_0 = 1; s(n) = W_0 + ... + W_{n-1}."""

    W: np.ndarray

    def __post_init__(self):
        v = _as_vector(self.W, len(self.W), "W")
        if v.shape[0] < 1:
            raise ConfigError("scale needs at least one weight")
        if np.any(v <= 0.0):
            raise ConfigError("scale weights must be strictly positive")
        if abs(v[0] - 1.0) > 1e-12:
            raise ConfigError(f"W_0 must equal 1 (it is not controllable), got {v[0]}")
        object.__setattr__(self, "W", v)

    @property
    def n_top(self) -> int:
        return self.W.shape[0]

    @property
    def s_values(self) -> np.ndarray:
        """s(0..N); s(n) is the sum of the first n weights."""
        return np.concatenate([[0.0], np.cumsum(self.W)])

    @classmethod
    def flat(cls, n_top: int) -> "DiscreteScale":
        return cls(np.ones(n_top))


@dataclass(frozen=True)
class BDChain:
    """Transition data on states {0..N}: up, down, and holding probabilities."""

    p: np.ndarray
    q: np.ndarray
    eps: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        n1 = len(self.p)
        p = _as_vector(self.p, n1, "p")
        q = _as_vector(self.q, n1, "q")
        eps = (np.zeros(n1) if self.eps is None
               else _as_vector(self.eps, n1, "eps"))
        if n1 < 2:
            raise ConfigError("chain needs at least the states 0 and 1")
        if p[-1] != 0.0 or q[0] != 0.0:
            raise ConfigError("boundary needs p_N = 0 and q_0 = 0")
        if np.any(p[:-1] <= 0.0) or np.any(q[1:] <= 0.0):
            raise ConfigError("interior transition probabilities must be positive "
                              "(irreducibility)")
        if np.any(eps < 0.0) or np.any(eps >= 1.0):
            raise ConfigError("holding probabilities must lie in [0, 1)")
        if np.max(np.abs(p + q + eps - 1.0)) > 1e-9:
            raise ConfigError("p + q + eps must equal 1 at every state")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "eps", _as_vector(eps, n1, "eps"))

    @property
    def n_top(self) -> int:
        return self.p.shape[0] - 1

    @classmethod
    def from_scale(cls, scale: DiscreteScale, eps=None) -> "BDChain":
        """Chain whose down/up ratios reproduce the scale weights."""
        N = scale.n_top
        stay = np.zeros(N + 1) if eps is None else np.asarray(eps, dtype=float)
        w = scale.W[1:] / scale.W[:-1]
        p = np.empty(N + 1)
        q = np.empty(N + 1)
        p[0], q[0] = 1.0 - stay[0], 0.0
        p[1:N] = (1.0 - stay[1:N]) / (1.0 + w)
        q[1:N] = (1.0 - stay[1:N]) * w / (1.0 + w)
        p[N], q[N] = 0.0, 1.0 - stay[N]
        return cls(p, q, stay)

    def to_scale(self) -> DiscreteScale:
        w = self.q[1:-1] / self.p[1:-1]
        return DiscreteScale(np.concatenate([[1.0], np.cumprod(w)]))


@dataclass(frozen=True)
class DiscreteCost:
    """Per-state running costs f(0..N) and the derived per-edge averages."""

    f: np.ndarray

    def __post_init__(self):
        v = _as_vector(self.f, len(self.f), "f")
        if np.any(v < 0.0):
            raise ConfigError("costs must be nonnegative")
        object.__setattr__(self, "f", v)

    @property
    def edge_values(self) -> np.ndarray:
        return 0.5 * (self.f[:-1] + self.f[1:])

    @classmethod
    def constant(cls, n_top: int, value: float = 1.0) -> "DiscreteCost":
        return cls(np.full(n_top + 1, float(value)))


@dataclass(frozen=True)
class DiscountVector:
    """Per-state one-step discount factors rho(0..N) in (0, 1]."""

    rho: np.ndarray

    def __post_init__(self):
        v = _as_vector(self.rho, len(self.rho), "rho")
        if np.any(v <= 0.0) or np.any(v > 1.0):
            raise ConfigError("discount factors must lie in (0, 1]")
        object.__setattr__(self, "rho", v)

    @property
    def kappa(self) -> np.ndarray:
        """kappa(x) = 1 - rho(x-1) rho(x), with rho(-1) = 1."""
        r = self.rho
        k = np.empty_like(r)
        k[0] = 1.0 - r[0]
        k[1:] = 1.0 - r[:-1] * r[1:]
        return k

    @classmethod
    def constant(cls, n_top: int, value: float) -> "DiscountVector":
        return cls(np.full(n_top + 1, float(value)))


@dataclass(frozen=True)
class DiscreteConstraint:
    """Constrained edge indices; edge 0 is always constrained (W_0 is fixed)."""

    edges: np.ndarray
    n_top: int

    def __post_init__(self):
        e = np.unique(np.asarray(self.edges, dtype=np.int64))
        if e.size == 0 or e[0] != 0:
            raise ConfigError("the constraint must contain edge 0")
        if np.any(e < 0) or np.any(e >= self.n_top):
            raise ConfigError(f"constraint edges must lie in [0, {self.n_top - 1}]")
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)

    @classmethod
    def bottom(cls, n_top: int, upper: int = 1) -> "DiscreteConstraint":
        """Edges {0, ..., upper-1}."""
        if not (1 <= upper <= n_top):
            raise ConfigError(f"constraint upper edge must be in [1, {n_top}], got {upper}")
        return cls(np.arange(upper), n_top)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.n_top, dtype=bool)
        m[self.edges] = True
        return m


# ---------------------------------------------------------------------------
# additive: exact oracle and closed-form sums


def hitting_cost_exact(chain: BDChain, cost: DiscreteCost, y: int) -> np.ndarray:
    """E_x[sum of f before the first visit to y], solved exactly for every x.

    The states below and above y decouple for a birth-death chain, giving two
    tridiagonal systems (first-step analysis with the reflecting boundaries).
    """
    N = chain.n_top
    if not (0 <= y <= N):
        raise ConfigError(f"target state {y} outside 0..{N}")
    f = cost.f
    out = np.zeros(N + 1)
    if y > 0:
        m = y
        ab = np.zeros((3, m))
        ab[1, :] = 1.0 - chain.eps[:y]
        ab[0, 1:] = -chain.p[:y - 1]
        ab[2, :-1] = -chain.q[1:y]
        out[:y] = solve_banded((1, 1), ab, f[:y])
    if y < N:
        m = N - y
        ab = np.zeros((3, m))
        ab[1, :] = 1.0 - chain.eps[y + 1:]
        ab[0, 1:] = -chain.p[y + 1: N]
        ab[2, :-1] = -chain.q[y + 2:]
        out[y + 1:] = solve_banded((1, 1), ab, f[y + 1:])
    return out


def shuttle_cost_exact(chain: BDChain, cost: DiscreteCost) -> float:
    up = hitting_cost_exact(chain, cost, chain.n_top)[0]
    down = hitting_cost_exact(chain, cost, 0)[chain.n_top]
    return float(up + down)


def hitting_cost_formula(x: int, y: int, scale: DiscreteScale, cost: DiscreteCost) -> float:
    """Closed-form hitting cost from the scale weights (finite double sums)."""
    N = scale.n_top
    if not (0 <= x <= N and 0 <= y <= N):
        raise ConfigError("states outside the chain")
    W = scale.W
    fe = cost.edge_values
    f = cost.f
    if x == y:
        return 0.0
    if x < y:
        prefix = np.concatenate([[0.0], np.cumsum(2.0 * fe / W)])  # sum_{u<v}
        return float(np.sum(f[x:y]) + np.sum(W[x:y] * prefix[x:y]))
    suffix = np.concatenate([np.cumsum((2.0 * fe / W)[::-1])[::-1], [0.0]])  # sum_{u>=v}
    return float(np.sum(f[y + 1: x + 1]) + np.sum(W[y:x] * suffix[y + 1: x + 1]))


def shuttle_cost_formula(scale: DiscreteScale, cost: DiscreteCost) -> float:
    """Separable form of the full shuttle cost: s(N) * sum of 2 f_edge / W."""
    fe = cost.edge_values
    return float(np.sum(scale.W) * np.sum(2.0 * fe / scale.W))


@dataclass(frozen=True)
class DiscreteStaticSolution:
    value: float
    W_opt: DiscreteScale
    s0_on_C: float
    cost_measure_on_C: float
    free_cost_sum: float
    multiplier: float


def optimal_static_chain(s0: DiscreteScale, cost: DiscreteCost,
                         constraint: DiscreteConstraint) -> DiscreteStaticSolution:
    """Closed-form optimum over weights agreeing with s0 on the constrained edges."""
    N = s0.n_top
    if constraint.n_top != N or cost.f.shape[0] != N + 1:
        raise ConfigError("scale, cost, and constraint sizes disagree")
    ind = constraint.mask()
    comp = ~ind
    fe = cost.edge_values
    if np.any(fe[comp] == 0.0):
        raise DegenerateProblemError(
            "edge cost vanishes on free edges: travel there is free and the infimum "
            "is not attained; apply collapse_free_edges first")
    W0 = s0.W
    s0_C = float(np.sum(W0[ind]))
    I_C = float(np.sum(2.0 * fe[ind] / W0[ind]))
    J = float(np.sum(np.sqrt(2.0 * fe[comp])))
    if I_C == 0.0:
        raise DegenerateProblemError(
            "edge cost vanishes on every constrained edge: the multiplier is undefined; "
            "apply collapse_free_edges first")
    if J > 0.0:
        cross, mult = min_ax_plus_b_over_x(I_C * J, s0_C * J)
    else:
        cross, mult = 0.0, math.sqrt(s0_C / I_C)
    value = s0_C * I_C + cross + J * J
    W = np.where(ind, W0, mult * np.sqrt(2.0 * fe))
    return DiscreteStaticSolution(value=value, W_opt=DiscreteScale(W), s0_on_C=s0_C,
                                  cost_measure_on_C=I_C, free_cost_sum=J,
                                  multiplier=mult)


@dataclass(frozen=True)
class CollapsedAdditiveChain:
    """Zero-cost free edges removed (their endpoints merged).

    The reduced optimum is the original infimum; extending a reduced scale
    with weight w on each removed edge costs exactly (sum of those w) times
    the reduced control's cost measure more.
    """

    s0: DiscreteScale
    cost: DiscreteCost
    constraint: DiscreteConstraint
    kept_edges: np.ndarray
    n_original: int

    def extend(self, W_reduced: np.ndarray, null_weight: float = 1.0) -> DiscreteScale:
        W = np.full(self.n_original, float(null_weight))
        W[self.kept_edges] = np.asarray(W_reduced, dtype=float)
        return DiscreteScale(W)


def collapse_free_edges(s0: DiscreteScale, cost: DiscreteCost,
                        constraint: DiscreteConstraint) -> CollapsedAdditiveChain:
    """Remove free edges whose edge cost is zero, merging their endpoint states."""
    N = s0.n_top
    fe = cost.edge_values
    remove = (fe == 0.0) & ~constraint.mask()
    if not np.any(remove):
        return CollapsedAdditiveChain(s0, cost, constraint, np.arange(N), N)
    kept = ~remove
    if int(np.count_nonzero(kept)) < 1:
        raise ConfigError("collapse removes every edge; the problem is trivial")
    # a removed edge has f = 0 at both endpoints, so merged groups cost 0
    state_keep = np.concatenate([[True], kept])  # drop the upper endpoint of removed edges
    f_red = cost.f[state_keep]
    new_edge_index = np.cumsum(kept) - 1
    red_constraint = DiscreteConstraint(new_edge_index[constraint.edges],
                                        int(np.count_nonzero(kept)))
    return CollapsedAdditiveChain(DiscreteScale(s0.W[kept]), DiscreteCost(f_red),
                                  red_constraint, np.nonzero(kept)[0], N)


# ---------------------------------------------------------------------------
# discounted: recurrence oracle, series, closed-form optimum


@dataclass(frozen=True)
class DiscountOracle:
    """Exact one-level discount products d (upward) and e (downward)."""

    d: np.ndarray  # d[x] = E_x[prod of rho before first visit to x+1], x = 0..N-1
    e: np.ndarray  # e[x] = E_x[prod of rho before first visit to x-1], x = 1..N (e[0] unused)

    def up_payoff(self, x: int, y: int) -> float:
        return float(np.prod(self.d[x:y]))

    def down_payoff(self, x: int, y: int) -> float:
        return float(np.prod(self.e[y + 1: x + 1]))

    @property
    def shuttle_payoff(self) -> float:
        return float(np.prod(self.d) * np.prod(self.e[1:]))


def discount_products_exact(chain: BDChain, disc: DiscountVector) -> DiscountOracle:
    N = chain.n_top
    r, p, q, eps = disc.rho, chain.p, chain.q, chain.eps
    d = np.empty(N)
    d[0] = r[0] * p[0] / (1.0 - r[0] * eps[0])
    for x in range(1, N):
        d[x] = r[x] * p[x] / (1.0 - r[x] * eps[x] - r[x] * q[x] * d[x - 1])
    e = np.zeros(N + 1)
    e[N] = r[N] * q[N] / (1.0 - r[N] * eps[N])
    for x in range(N - 1, 0, -1):
        e[x] = r[x] * q[x] / (1.0 - r[x] * eps[x] - r[x] * p[x] * e[x + 1])
    return DiscountOracle(d=d, e=e)


@dataclass(frozen=True)
class DiscreteSeries:
    """Per-state series values and weight-ratio derivative columns.

    G and D drive upward payoffs, Gt and Dt downward ones; both are finite
    sums over interleaved index chains, evaluated order by order (the chains
    need 2k strictly ordered indices, so order k dies out beyond N/2).
    """

    G: np.ndarray
    D: np.ndarray
    Gt: np.ndarray
    Dt: np.ndarray  # Dt[0] is undefined (no edge below state 0) and set to 0
    orders_used: int


def discount_series_chain(scale: DiscreteScale, disc: DiscountVector) -> DiscreteSeries:
    N = scale.n_top
    if disc.rho.shape[0] != N + 1:
        raise ConfigError("scale and discount sizes disagree")
    W = scale.W
    kap = disc.kappa
    # upward order step: D_x = sum_{j<=x} kappa_j tau(j-1)/W_{j-1},
    # then tau'(x) = sum_{v<x} W_v D_v
    G = np.ones(N + 1)
    D = np.zeros(N + 1)
    tau = np.ones(N + 1)
    orders = 0
    while np.any(tau != 0.0):
        c = np.concatenate([[0.0], np.cumsum(kap[1:] * tau[:-1] / W)])
        D += c
        tau = np.concatenate([[0.0], np.cumsum(W * c[:-1])])
        G += tau
        orders += 1
        if orders > N + 1:
            raise NumericalError("discrete series failed to terminate")
    # downward order step: Dt_x = sum_{j>=x} kappa_{j+1} tau(j+1)/W_j,
    # then tau'(x) = sum_{v>=x} W_v Dt_{v+1}  (Dt_N = 0 at the boundary)
    Gt = np.ones(N + 1)
    Dt = np.zeros(N + 1)
    tau = np.ones(N + 1)
    while np.any(tau != 0.0):
        dt = np.zeros(N + 2)
        if N >= 2:
            src = kap[2: N + 1] * tau[2: N + 1] / W[1:N]
            dt[1:N] = np.cumsum(src[::-1])[::-1]
        Dt[1:] += dt[1: N + 1]
        tau = np.zeros(N + 1)
        tau[:N] = np.cumsum((W * dt[1: N + 1])[::-1])[::-1]
        Gt += tau
    return DiscreteSeries(G=G, D=D, Gt=Gt, Dt=Dt, orders_used=orders)


def discounted_hitting_formula(x: int, y: int, scale: DiscreteScale, disc: DiscountVector,
                               series: DiscreteSeries | None = None) -> float:
    """Series form of E_x[product of rho before the first visit to y]."""
    if series is None:
        series = discount_series_chain(scale, disc)
    r = disc.rho
    if x == y:
        return 1.0
    if x < y:
        return float(np.prod(r[x:y]) * series.G[x] / series.G[y])
    return float(np.prod(r[y + 1: x + 1]) * series.Gt[x] / series.Gt[y])


def shuttle_payoff_formula(scale: DiscreteScale, disc: DiscountVector,
                           series: DiscreteSeries | None = None) -> float:
    if series is None:
        series = discount_series_chain(scale, disc)
    N = scale.n_top
    r = disc.rho
    pref = r[0] * r[N] * float(np.prod(r[1:N])) ** 2
    return pref / (series.G[N] * series.Gt[0])


@dataclass(frozen=True)
class DiscreteDiscountedSolution:
    value: float
    W_opt: DiscreteScale
    continuation_level: float | None
    components: dict


def optimal_discounted_chain(s0: DiscreteScale, disc: DiscountVector,
                             y: int) -> DiscreteDiscountedSolution:
    """Closed-form discounted optimum with edges {0..y-1} constrained.

    Above the constraint the optimal weight is a constant multiple of
    sqrt(kappa(x+1)); the value combines the fixed-region series state with
    discrete cosh/sinh sums over the free region.
    """
    N = s0.n_top
    if disc.rho.shape[0] != N + 1:
        raise ConfigError("scale and discount sizes disagree")
    if not (1 <= y <= N):
        raise ConfigError(f"constraint edge y must be in [1, {N}], got {y}")
    kap = disc.kappa
    W0 = s0.W
    if np.all(kap[1:] == 0.0):
        # undiscounted: every control attains payoff 1
        W = np.concatenate([W0[:y], np.ones(N - y)])
        return DiscreteDiscountedSolution(value=1.0, W_opt=DiscreteScale(W),
                                          continuation_level=None,
                                          components={"undiscounted": True})
    if np.any(kap[y + 1:] == 0.0):
        raise DegenerateProblemError(
            "adjacent discount factors multiply to 1 above the constraint: "
            "the optimal weight there would vanish")
    # fixed-region upward state (value and weight-derivative at y)
    Gv, Dv = 1.0, 0.0
    for x in range(y):
        Gv, Dv = Gv + W0[x] * Dv, Dv + kap[x + 1] * Gv / W0[x]
    if Dv == 0.0:
        raise DegenerateProblemError(
            "no discounting below the constraint edge: the supremum is not attained")

    def back_prop(gt: float, dt: float) -> float:
        for x in range(y - 1, -1, -1):
            gt, dt = gt + W0[x] * dt, dt + kap[x + 1] * gt / W0[x]
        return gt

    H = back_prop(1.0, 0.0)
    K = back_prop(0.0, 1.0)
    cs = np.sqrt(kap[y + 1: N + 1])
    plus, minus = float(np.prod(1.0 + cs)), float(np.prod(1.0 - cs))
    even, odd = 0.5 * (plus + minus), 0.5 * (plus - minus)
    root = math.sqrt(Gv * H) * even + math.sqrt(Dv * K) * odd
    r = disc.rho
    pref = r[0] * r[N] * float(np.prod(r[1:N])) ** 2
    value = pref / root**2
    level = math.sqrt(Gv * K / (H * Dv))
    W = np.concatenate([W0[:y], level * cs])
    comps = {"fixed_value": Gv, "fixed_dweight": Dv, "adjoint_value": H,
             "adjoint_dweight": K, "free_even_sum": even, "free_odd_sum": odd,
             "prefactor": pref}
    return DiscreteDiscountedSolution(value=value, W_opt=DiscreteScale(W),
                                      continuation_level=level, components=comps)


# ---------------------------------------------------------------------------
# waiting and continuous-time conversions


def convert_waiting(chain: BDChain, cost: DiscreteCost | None = None,
                    disc: DiscountVector | None = None):
    """Condition out the holding times: an equivalent chain without waiting.

    Costs scale by 1/(1-eps); discounts become the geometric-sum factor
    (1-eps) r / (1 - eps r).
    """
    stay = chain.eps
    clean = BDChain(chain.p / (1.0 - stay), chain.q / (1.0 - stay), None)
    converted_cost = converted_disc = None
    if cost is not None:
        converted_cost = DiscreteCost(cost.f / (1.0 - stay))
    if disc is not None:
        r = disc.rho
        converted_disc = DiscountVector((1.0 - stay) * r / (1.0 - stay * r))
    return clean, converted_cost, converted_disc


def convert_ctmc(lam, mu, cost: DiscreteCost | None = None,
                 alpha=None):
    """Jump chain of a continuous-time birth-death process, with converted payoffs.

    Running costs become f/(rate) per visit; a discount rate alpha becomes
    the Laplace transform rate/(alpha + rate) of the exponential holding time.
    """
    lam = np.asarray(lam, dtype=float)
    mu = np.asarray(mu, dtype=float)
    N = lam.shape[0] - 1
    if mu.shape != lam.shape:
        raise ConfigError("birth and death rate vectors must have equal length")
    if lam[N] != 0.0 or mu[0] != 0.0:
        raise ConfigError("boundary rates must satisfy lam_N = 0 and mu_0 = 0")
    if np.any(lam[:N] <= 0.0) or np.any(mu[1:] <= 0.0):
        raise ConfigError("interior rates must be positive")
    total = lam + mu
    if np.any(total <= 0.0):
        raise ConfigError("zero total rate at a state")
    chain = BDChain(lam / total, mu / total, None)
    converted_cost = converted_disc = None
    if cost is not None:
        converted_cost = DiscreteCost(cost.f / total)
    if alpha is not None:
        a = np.asarray(alpha, dtype=float)
        if np.any(a < 0.0):
            raise ConfigError("discount rates must be nonnegative")
        converted_disc = DiscountVector(total / (a + total))
    return chain, converted_cost, converted_disc


# ---------------------------------------------------------------------------
# brute force


@dataclass(frozen=True)
class BruteForceResult:
    value: float
    W: DiscreteScale
    evaluations: int


def _weight_chunks(n_free: int, points: int, w_range: tuple[float, float], cap: int):
    """Yield (n_free, m) lane chunks covering the full log grid, in index order."""
    total = points ** n_free
    if total > cap:
        raise ConfigError(
            f"brute force would evaluate {total} points; cap is {cap} "
            f"(reduce dimensions or points)")
    axis = np.geomspace(w_range[0], w_range[1], points)
    if n_free == 0:
        yield np.empty((0, 1))
        return
    inner = np.meshgrid(*([axis] * (n_free - 1)), indexing="ij") if n_free > 1 else []
    inner = np.stack([m.ravel() for m in inner]) if inner else np.empty((0, 1))
    m = inner.shape[1]
    for v in axis:
        chunk = np.empty((n_free, m))
        chunk[0] = v
        if n_free > 1:
            chunk[1:] = inner
        yield chunk


def brute_force_additive(s0: DiscreteScale, cost: DiscreteCost,
                         constraint: DiscreteConstraint, points: int = 200,
                         w_range: tuple[float, float] = (0.1, 10.0),
                         cap: int = 20_000_000) -> BruteForceResult:
    """Grid minimum of the exact shuttle cost over the free weights.

    Ties resolve to the lowest grid index. The winner is re-checked against
    the tridiagonal oracle.
    """
    free = np.nonzero(~constraint.mask())[0]
    fe = cost.edge_values
    fixed_W = float(np.sum(s0.W[constraint.mask()]))
    fixed_I = float(np.sum((2.0 * fe / s0.W)[constraint.mask()]))
    best_val = math.inf
    best_W = None
    total = 0
    for lanes in _weight_chunks(free.shape[0], points, w_range, cap):
        m = lanes.shape[1]
        total += m
        sum_W = np.full(m, fixed_W)
        sum_I = np.full(m, fixed_I)
        for j, edge in enumerate(free):
            sum_W += lanes[j]
            sum_I += 2.0 * fe[edge] / lanes[j]
        costs = sum_W * sum_I
        i = int(np.argmin(costs))
        if costs[i] < best_val:
            best_val = float(costs[i])
            best_W = lanes[:, i].copy()
    W = np.array(s0.W)
    if free.size:
        W[free] = best_W
    scale = DiscreteScale(W)
    oracle = shuttle_cost_exact(BDChain.from_scale(scale), cost)
    if abs(oracle - best_val) > 1e-9 * max(1.0, abs(oracle)):
        raise NumericalError("separable cost disagrees with the tridiagonal oracle")
    return BruteForceResult(value=best_val, W=scale, evaluations=total)


def _discount_payoff_lanes(W_all: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Shuttle discount product per lane (columns of W_all)."""
    N = W_all.shape[0]
    m = W_all.shape[1]
    d_prod = np.full(m, r[0])
    d_prev = np.full(m, r[0])
    for x in range(1, N):
        w = W_all[x] / W_all[x - 1]
        p = 1.0 / (1.0 + w)
        d_prev = r[x] * p / (1.0 - r[x] * (1.0 - p) * d_prev)
        d_prod *= d_prev
    e_prod = np.full(m, r[N])
    e_prev = np.full(m, r[N])
    for x in range(N - 1, 0, -1):
        w = W_all[x] / W_all[x - 1]
        p = 1.0 / (1.0 + w)
        e_prev = r[x] * (1.0 - p) / (1.0 - r[x] * p * e_prev)
        e_prod *= e_prev
    return d_prod * e_prod


def brute_force_discounted(s0: DiscreteScale, disc: DiscountVector, y: int,
                           points: int = 200,
                           w_range: tuple[float, float] = (0.1, 10.0),
                           cap: int = 20_000_000) -> BruteForceResult:
    """Grid maximum of the exact shuttle discount product over edges y..N-1."""
    N = s0.n_top
    if not (1 <= y <= N):
        raise ConfigError(f"constraint edge y must be in [1, {N}], got {y}")
    free = np.arange(y, N)
    r = disc.rho
    best_val = -math.inf
    best_W = None
    total = 0
    for lanes in _weight_chunks(free.shape[0], points, w_range, cap):
        m = lanes.shape[1]
        total += m
        W_all = np.empty((N, m))
        W_all[:y] = s0.W[:y, None]
        if free.size:
            W_all[y:] = lanes
        payoff = _discount_payoff_lanes(W_all, r)
        i = int(np.argmax(payoff))
        if payoff[i] > best_val:
            best_val = float(payoff[i])
            best_W = lanes[:, i].copy()
    W = np.array(s0.W)
    if free.size:
        W[free] = best_W
    scale = DiscreteScale(W)
    oracle = discount_products_exact(BDChain.from_scale(scale), disc).shuttle_payoff
    if abs(oracle - best_val) > 1e-9 * max(abs(oracle), 1e-300):
        raise NumericalError("lane recurrence disagrees with the oracle")
    return BruteForceResult(value=best_val, W=scale, evaluations=total)
