"""Optimal scale-function controls for shuttle problems.

Solvers for minimizing expected shuttle costs (or maximizing discounted
shuttle payoffs) of reflected one-dimensional diffusions and birth-death
chains, where the control is the scale density (equivalently the drift, or
the up/down transition ratios). Every closed form ships with an independent
oracle: exact linear solves, recurrences, series with proven truncation
bounds, quadrature, and Monte Carlo including Bellman martingale checks.
"""

from .additive import (
    AdditiveProblem,
    CostCumulatives,
    ReducedAdditive,
    StaticSolution,
    hitting_cost_down,
    hitting_cost_up,
    min_ax_plus_b_over_x,
    optimal_static,
    shuttle_cost,
    vanishing_f_reduction,
)
from .bellman import (
    AdditiveBellman,
    BellmanEvaluation,
    ControlledPath,
    DiscountedBellman,
    DiscreteAdditiveBellman,
    DiscreteDiscountedBellman,
    DiscretePath,
    bellman_additive,
    bellman_discounted,
    bellman_discrete_additive,
    bellman_discrete_discounted,
    dynamic_extension_additive,
)
from .chain import (
    BDChain,
    BruteForceResult,
    CollapsedAdditiveChain,
    DiscountOracle,
    DiscountVector,
    DiscreteConstraint,
    DiscreteCost,
    DiscreteDiscountedSolution,
    DiscreteScale,
    DiscreteSeries,
    DiscreteStaticSolution,
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
from .discounted import (
    DiscountedProblem,
    DiscountedSolution,
    SeriesColumn,
    SeriesTable,
    constrained_optimal_payoff,
    discounted_shuttle_payoff,
    hitting_payoff,
    optimal_continuation_level,
    optimal_discounted,
    series_column,
    series_table,
)
from .errors import (
    ConfigError,
    DegenerateProblemError,
    NumericalError,
    ShuttleError,
    VerificationFailure,
)
from .grid import (
    CoefficientField,
    ConstraintSet,
    DriftField,
    Grid,
    ScaleDensity,
    SpeedDensity,
    drift_to_scale,
    scale_to_drift,
    speed_from_scale,
)
from .simulate import (
    EstimateWithCI,
    MartingaleCase,
    MartingaleCaseResult,
    MartingaleReport,
    SimConfig,
    martingale_test_chain,
    martingale_test_diffusion,
    simulate_chain_path,
    simulate_chain_shuttle,
    simulate_controlled_path,
    simulate_ctmc_shuttle,
    simulate_diffusion_shuttle,
)

__version__ = "0.1.0"
