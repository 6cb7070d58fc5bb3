"""Command-line front end: solve, simulate, and verify problem configs.

One JSON config describes one problem instance; see README for the schema.
Exit codes: 0 success/PASS, 2 config error, 3 degenerate instance,
4 numerical failure, 5 verification FAIL.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import chain as ch
from .additive import AdditiveProblem, optimal_static, shuttle_cost
from .discounted import DiscountedProblem, discounted_shuttle_payoff, optimal_discounted
from .errors import (
    ConfigError,
    DegenerateProblemError,
    NumericalError,
    ShuttleError,
    VerificationFailure,
)
from .grid import CoefficientField, ConstraintSet, DriftField, Grid, ScaleDensity, drift_to_scale
from .simulate import SimConfig, simulate_chain_shuttle, simulate_ctmc_shuttle, simulate_diffusion_shuttle

SCHEMA_VERSION = 1

CONTINUOUS_KINDS = ("additive-continuous", "discounted-continuous")
DISCRETE_KINDS = ("additive-discrete", "discounted-discrete")


# ---------------------------------------------------------------------------
# config parsing


def _coefficient(spec, grid: Grid, name: str) -> CoefficientField:
    if isinstance(spec, (int, float)):
        return CoefficientField.constant(grid, float(spec))
    if isinstance(spec, list):
        return CoefficientField(grid, np.asarray(spec, dtype=float))
    if isinstance(spec, str):
        if spec.startswith("const:"):
            return CoefficientField.constant(grid, float(spec[6:]))
        if spec.startswith("poly:"):
            coeffs = [float(c) for c in spec[5:].split(",")]
            x = grid.midpoints
            vals = np.zeros_like(x)
            for k, c in enumerate(coeffs):
                vals += c * x**k
            return CoefficientField(grid, vals)
        if spec.startswith("cells:"):
            return CoefficientField(grid, np.asarray(json.loads(spec[6:]), dtype=float))
    raise ConfigError(f"cannot parse coefficient spec for {name!r}: {spec!r}")


def _state_vector(spec, n_top: int, name: str) -> np.ndarray:
    if isinstance(spec, (int, float)):
        return np.full(n_top + 1, float(spec))
    if isinstance(spec, list):
        v = np.asarray(spec, dtype=float)
        if v.shape != (n_top + 1,):
            raise ConfigError(f"{name} needs {n_top + 1} per-state values, got {v.shape[0]}")
        return v
    if isinstance(spec, str) and spec.startswith("const:"):
        return np.full(n_top + 1, float(spec[6:]))
    raise ConfigError(f"cannot parse per-state spec for {name!r}: {spec!r}")


def _reference_scale(cfg: dict, grid: Grid, sigma2: CoefficientField) -> ScaleDensity:
    ref = cfg.get("reference")
    if ref is None:
        return ScaleDensity.constant(grid)
    if "sprime" in ref:
        field = _coefficient(ref["sprime"], grid, "reference.sprime")
        return ScaleDensity(grid, field.values)
    if "drift" in ref:
        mu = _coefficient(ref["drift"], grid, "reference.drift")
        return drift_to_scale(DriftField(grid, mu.values), sigma2)
    raise ConfigError("reference must give 'sprime' or 'drift'")


def _continuous_constraint(cfg: dict, grid: Grid) -> ConstraintSet:
    c = cfg.get("constraint")
    if c is None:
        return ConstraintSet.empty(grid)
    if isinstance(c, dict) and "upper" in c:
        return ConstraintSet.below(grid, float(c["upper"]))
    raise ConfigError("continuous constraint must be null or {'upper': y}")


def _load_config(path: str, args) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from None
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ConfigError("config must be a JSON object with a 'kind' field")
    if cfg["kind"] not in CONTINUOUS_KINDS + DISCRETE_KINDS:
        raise ConfigError(f"unknown kind {cfg['kind']!r}")
    if args.grid is not None:
        cfg["grid"] = args.grid
    if args.seed is not None:
        cfg.setdefault("sim", {})["seed"] = args.seed
    if args.threads is not None:
        cfg.setdefault("sim", {})["threads"] = args.threads
    if args.tol is not None:
        cfg["tol"] = args.tol
    return cfg


def _sim_config(cfg: dict) -> SimConfig:
    s = cfg.get("sim", {})
    return SimConfig(step=float(s.get("step", 1e-4)),
                     replicas=int(s.get("replicas", 10_000)),
                     seed=int(s.get("seed", 0)),
                     max_time=float(s.get("max_time", 1_000.0)),
                     threads=int(s.get("threads", 1)))


def _continuous_instance(cfg: dict):
    grid = Grid(int(cfg.get("grid", 2000)))
    sigma2 = _coefficient(cfg.get("sigma2", "const:1"), grid, "sigma2").require_positive("sigma2")
    s0 = _reference_scale(cfg, grid, sigma2)
    return grid, sigma2, s0


def _discrete_instance(cfg: dict):
    n_top = int(cfg.get("n_top", 0))
    if "ctmc" in cfg:
        lam = np.asarray(cfg["ctmc"]["lam"], dtype=float)
        mu = np.asarray(cfg["ctmc"]["mu"], dtype=float)
        return n_top if n_top else lam.shape[0] - 1, (lam, mu)
    if n_top < 1:
        raise ConfigError("discrete config needs n_top >= 1")
    return n_top, None


def _discrete_reference(cfg: dict, n_top: int) -> ch.DiscreteScale:
    ref = cfg.get("reference")
    if ref is None:
        return ch.DiscreteScale.flat(n_top)
    if "W" in ref:
        return ch.DiscreteScale(np.asarray(ref["W"], dtype=float))
    raise ConfigError("discrete reference must give 'W'")


def _discrete_constraint(cfg: dict, n_top: int) -> ch.DiscreteConstraint:
    c = cfg.get("constraint")
    if c is None:
        return ch.DiscreteConstraint.bottom(n_top, 1)
    if isinstance(c, dict) and "upper" in c:
        return ch.DiscreteConstraint.bottom(n_top, int(c["upper"]))
    if isinstance(c, list):
        return ch.DiscreteConstraint(np.asarray(c, dtype=np.int64), n_top)
    raise ConfigError("discrete constraint must be null, {'upper': y}, or an edge list")


# ---------------------------------------------------------------------------
# result document


def validate_result(doc: dict) -> None:
    """Light structural validation of an emitted result document."""
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError("result document carries the wrong schema_version")
    for key in ("command", "kind", "result"):
        if key not in doc:
            raise ConfigError(f"result document lacks {key!r}")
    if not isinstance(doc["result"], dict):
        raise ConfigError("result must be an object")
    def finite(x):
        return isinstance(x, (int, float)) and math.isfinite(x)
    for k, v in doc["result"].items():
        if isinstance(v, (int, float)) and not finite(v):
            raise ConfigError(f"result field {k!r} is not finite")


def _emit(doc: dict, json_path: str | None) -> None:
    validate_result(doc)
    if json_path:
        with open(json_path, "w") as fh:
            json.dump(doc, fh, indent=2)


# ---------------------------------------------------------------------------
# commands


def cmd_solve(cfg: dict, args) -> dict:
    kind = cfg["kind"]
    tol = float(cfg.get("tol", 1e-10))
    if kind == "additive-continuous":
        grid, sigma2, s0 = _continuous_instance(cfg)
        f = _coefficient(cfg.get("f", "const:1"), grid, "f").require_nonnegative("f")
        problem = AdditiveProblem(grid, sigma2, f, s0, _continuous_constraint(cfg, grid))
        sol = optimal_static(problem)
        quad = shuttle_cost(sol.s_opt, f, sigma2)
        print(f"kind                 {kind}")
        print(f"optimal value        {sol.value:.12g}")
        print(f"quadrature check     {quad:.12g}")
        print(f"s0 mass on C         {sol.s0_on_C:.12g}")
        print(f"cost measure on C    {sol.cost_measure_on_C:.12g}")
        print(f"free cost integral   {sol.free_cost_integral:.12g}")
        print(f"free multiplier      {sol.multiplier:.12g}")
        return {"value": sol.value, "quadrature_check": quad,
                "s0_on_C": sol.s0_on_C, "cost_measure_on_C": sol.cost_measure_on_C,
                "free_cost_integral": sol.free_cost_integral,
                "multiplier": sol.multiplier,
                "control_sprime": [float(v) for v in sol.s_opt.sprime]}
    if kind == "discounted-continuous":
        grid, sigma2, s0 = _continuous_instance(cfg)
        alpha = _coefficient(cfg.get("alpha", "const:1"), grid, "alpha").require_nonnegative("alpha")
        y = float(cfg.get("constraint", {}).get("upper", 0.0)) if cfg.get("constraint") else 0.0
        problem = DiscountedProblem(grid, sigma2, alpha, s0, y)
        sol = optimal_discounted(problem, tol=tol)
        print(f"kind                 {kind}")
        print(f"optimal payoff       {sol.value:.12g}")
        print(f"rate integral A(y)   {sol.suffix_rate_integral:.12g}")
        if sol.continuation_level is not None:
            print(f"continuation level   {sol.continuation_level:.12g}")
        return {"value": sol.value, "suffix_rate_integral": sol.suffix_rate_integral,
                "continuation_level": sol.continuation_level,
                "control_sprime": [float(v) for v in sol.s_opt.sprime]}
    if kind == "additive-discrete":
        n_top, ctmc = _discrete_instance(cfg)
        s0 = _discrete_reference(cfg, n_top)
        if ctmc is not None:
            lam, mu = ctmc
            cost0 = ch.DiscreteCost(_state_vector(cfg.get("f", 1.0), n_top, "f"))
            _, cost, _ = ch.convert_ctmc(lam, mu, cost=cost0)
        else:
            cost = ch.DiscreteCost(_state_vector(cfg.get("f", 1.0), n_top, "f"))
        constraint = _discrete_constraint(cfg, n_top)
        sol = ch.optimal_static_chain(s0, cost, constraint)
        print(f"kind                 {kind}")
        print(f"optimal value        {sol.value:.12g}")
        print(f"W_opt                {np.array2string(sol.W_opt.W, precision=8)}")
        return {"value": sol.value, "W": [float(w) for w in sol.W_opt.W],
                "s0_on_C": sol.s0_on_C, "cost_measure_on_C": sol.cost_measure_on_C,
                "free_cost_sum": sol.free_cost_sum, "multiplier": sol.multiplier}
    # discounted-discrete
    n_top, ctmc = _discrete_instance(cfg)
    s0 = _discrete_reference(cfg, n_top)
    if ctmc is not None:
        lam, mu = ctmc
        alpha = _state_vector(cfg.get("alpha", 0.0), n_top, "alpha")
        _, _, disc = ch.convert_ctmc(lam, mu, alpha=alpha)
    else:
        disc = ch.DiscountVector(_state_vector(cfg.get("rho", 1.0), n_top, "rho"))
    c = cfg.get("constraint") or {"upper": 1}
    y = int(c["upper"]) if isinstance(c, dict) else int(max(np.asarray(c)) + 1)
    sol = ch.optimal_discounted_chain(s0, disc, y)
    print(f"kind                 {kind}")
    print(f"optimal payoff       {sol.value:.12g}")
    print(f"W_opt                {np.array2string(sol.W_opt.W, precision=8)}")
    return {"value": sol.value, "W": [float(w) for w in sol.W_opt.W],
            "continuation_level": sol.continuation_level}


def cmd_simulate(cfg: dict, args) -> dict:
    kind = cfg["kind"]
    sim = _sim_config(cfg)
    csv_path = args.csv
    if kind in CONTINUOUS_KINDS:
        grid, sigma2, s0 = _continuous_instance(cfg)
        if kind == "additive-continuous":
            f = _coefficient(cfg.get("f", "const:1"), grid, "f").require_nonnegative("f")
            est = simulate_diffusion_shuttle(s0, sigma2, f=f, config=sim, csv_path=csv_path)
        else:
            a = _coefficient(cfg.get("alpha", "const:1"), grid, "alpha").require_nonnegative("alpha")
            est = simulate_diffusion_shuttle(s0, sigma2, alpha=a, config=sim, csv_path=csv_path)
    else:
        n_top, ctmc = _discrete_instance(cfg)
        if ctmc is not None:
            lam, mu = ctmc
            if kind == "additive-discrete":
                f = _state_vector(cfg.get("f", 1.0), n_top, "f")
                est = simulate_ctmc_shuttle(lam, mu, f=f, config=sim, csv_path=csv_path)
            else:
                a = _state_vector(cfg.get("alpha", 0.0), n_top, "alpha")
                est = simulate_ctmc_shuttle(lam, mu, alpha=a, config=sim, csv_path=csv_path)
        else:
            s0 = _discrete_reference(cfg, n_top)
            eps = (_state_vector(cfg["eps"], n_top, "eps") if "eps" in cfg else None)
            chain = ch.BDChain.from_scale(s0, eps=eps)
            if kind == "additive-discrete":
                cost = ch.DiscreteCost(_state_vector(cfg.get("f", 1.0), n_top, "f"))
                est = simulate_chain_shuttle(chain, cost=cost, config=sim, csv_path=csv_path)
            else:
                disc = ch.DiscountVector(_state_vector(cfg.get("rho", 1.0), n_top, "rho"))
                est = simulate_chain_shuttle(chain, disc=disc, config=sim, csv_path=csv_path)
    print(f"kind                 {kind}")
    print(f"estimate             {est.mean:.8g}")
    print(f"standard error       {est.se:.4g}")
    print(f"replicas             {est.replicas}")
    print(f"censored             {est.censored}")
    return {"estimate": est.mean, "se": est.se, "replicas": est.replicas,
            "censored": est.censored}


def _check(name: str, ok: bool, detail: str, lines: list, failures: list) -> None:
    status = "PASS" if ok else "FAIL"
    lines.append(f"[{status}] {name}: {detail}")
    if not ok:
        failures.append(name)


def cmd_verify(cfg: dict, args) -> dict:
    kind = cfg["kind"]
    sim = _sim_config(cfg)
    rng = np.random.default_rng(sim.seed)
    lines: list[str] = []
    failures: list[str] = []
    tol = float(cfg.get("tol", 1e-10))
    if kind == "additive-discrete":
        n_top, ctmc = _discrete_instance(cfg)
        s0 = _discrete_reference(cfg, n_top)
        cost = ch.DiscreteCost(_state_vector(cfg.get("f", 1.0), n_top, "f"))
        if ctmc is not None:
            lam, mu = ctmc
            _, cost, _ = ch.convert_ctmc(lam, mu, cost=cost)
        constraint = _discrete_constraint(cfg, n_top)
        # formula vs tridiagonal oracle on the reference and random scales
        worst = 0.0
        for _ in range(50):
            W = np.concatenate([[1.0], np.exp(rng.normal(0.0, 0.7, n_top - 1))]) \
                if n_top > 1 else np.array([1.0])
            sc = ch.DiscreteScale(W)
            a = ch.shuttle_cost_formula(sc, cost)
            b = ch.shuttle_cost_exact(ch.BDChain.from_scale(sc), cost)
            worst = max(worst, abs(a - b) / max(abs(b), 1e-300))
        _check("formula-vs-oracle", worst < 1e-10, f"max rel err {worst:.2e}", lines, failures)
        sol = ch.optimal_static_chain(s0, cost, constraint)
        gaps = []
        for _ in range(100):
            W = np.array(sol.W_opt.W)
            free = ~constraint.mask()
            W[free] *= np.exp(rng.normal(0.0, 0.5, int(np.count_nonzero(free))))
            gaps.append(ch.shuttle_cost_formula(ch.DiscreteScale(W), cost) - sol.value)
        _check("dominance", min(gaps) >= -1e-9 * sol.value,
               f"min perturbation gap {min(gaps):.3e}", lines, failures)
        if "perturb" in cfg:
            factor = float(cfg["perturb"].get("factor", 2.0))
            W = np.array(sol.W_opt.W)
            W[~constraint.mask()] *= factor
            gap = ch.shuttle_cost_formula(ch.DiscreteScale(W), cost) - sol.value
            lines.append(f"[INFO] perturbed control (factor {factor}) costs {gap:.6g} more")
        est = simulate_chain_shuttle(ch.BDChain.from_scale(sol.W_opt), cost=cost, config=sim)
        dev = abs(est.mean - sol.value)
        _check("simulation-CI", dev <= 3.0 * est.se,
               f"|{est.mean:.6g} - {sol.value:.6g}| vs 3se={3 * est.se:.3g}", lines, failures)
        result = {"value": sol.value}
    elif kind == "discounted-discrete":
        n_top, ctmc = _discrete_instance(cfg)
        s0 = _discrete_reference(cfg, n_top)
        if ctmc is not None:
            lam, mu = ctmc
            alpha = _state_vector(cfg.get("alpha", 0.0), n_top, "alpha")
            _, _, disc = ch.convert_ctmc(lam, mu, alpha=alpha)
        else:
            disc = ch.DiscountVector(_state_vector(cfg.get("rho", 1.0), n_top, "rho"))
        worst = 0.0
        for _ in range(50):
            W = np.concatenate([[1.0], np.exp(rng.normal(0.0, 0.7, n_top - 1))]) \
                if n_top > 1 else np.array([1.0])
            sc = ch.DiscreteScale(W)
            a = ch.shuttle_payoff_formula(sc, disc)
            b = ch.discount_products_exact(ch.BDChain.from_scale(sc), disc).shuttle_payoff
            worst = max(worst, abs(a - b) / max(abs(b), 1e-300))
        _check("series-vs-oracle", worst < 1e-10, f"max rel err {worst:.2e}", lines, failures)
        c = cfg.get("constraint") or {"upper": 1}
        y = int(c["upper"]) if isinstance(c, dict) else int(max(np.asarray(c)) + 1)
        sol = ch.optimal_discounted_chain(s0, disc, y)
        gaps = []
        for _ in range(100):
            W = np.array(sol.W_opt.W)
            W[y:] *= np.exp(rng.normal(0.0, 0.5, n_top - y))
            gaps.append(sol.value - ch.shuttle_payoff_formula(ch.DiscreteScale(W), disc))
        _check("dominance", min(gaps) >= -1e-9 * sol.value,
               f"min perturbation gap {min(gaps):.3e}", lines, failures)
        if "perturb" in cfg:
            factor = float(cfg["perturb"].get("factor", 2.0))
            W = np.array(sol.W_opt.W)
            W[y:] *= factor
            gap = sol.value - ch.shuttle_payoff_formula(ch.DiscreteScale(W), disc)
            lines.append(f"[INFO] perturbed control (factor {factor}) loses {gap:.6g} payoff")
        est = simulate_chain_shuttle(ch.BDChain.from_scale(sol.W_opt), disc=disc, config=sim)
        dev = abs(est.mean - sol.value)
        _check("simulation-CI", dev <= 3.0 * est.se,
               f"|{est.mean:.6g} - {sol.value:.6g}| vs 3se={3 * est.se:.3g}", lines, failures)
        result = {"value": sol.value}
    elif kind == "additive-continuous":
        grid, sigma2, s0 = _continuous_instance(cfg)
        f = _coefficient(cfg.get("f", "const:1"), grid, "f").require_nonnegative("f")
        problem = AdditiveProblem(grid, sigma2, f, s0, _continuous_constraint(cfg, grid))
        sol = optimal_static(problem)
        quad = shuttle_cost(sol.s_opt, f, sigma2)
        _check("value-vs-quadrature", abs(quad - sol.value) <= 1e-9 * max(sol.value, 1.0),
               f"{quad:.10g} vs {sol.value:.10g}", lines, failures)
        free = problem.constraint.complement
        gaps = []
        for _ in range(100):
            sp = np.array(sol.s_opt.sprime)
            sp[free] *= np.exp(rng.normal(0.0, 0.4, int(np.count_nonzero(free))))
            gaps.append(shuttle_cost(ScaleDensity(grid, sp), f, sigma2) - sol.value)
        _check("dominance", min(gaps) >= -1e-9 * sol.value,
               f"min perturbation gap {min(gaps):.3e}", lines, failures)
        if "perturb" in cfg:
            factor = float(cfg["perturb"].get("factor", 2.0))
            sp = np.array(sol.s_opt.sprime)
            sp[free] *= factor
            gap = shuttle_cost(ScaleDensity(grid, sp), f, sigma2) - sol.value
            lines.append(f"[INFO] perturbed control (factor {factor}) costs {gap:.6g} more")
        est = simulate_diffusion_shuttle(sol.s_opt, sigma2, f=f, config=sim)
        allowance = 3.0 * est.se + 4.0 * math.sqrt(sim.step) * sol.value
        _check("simulation-CI", abs(est.mean - sol.value) <= allowance,
               f"|{est.mean:.6g} - {sol.value:.6g}| vs {allowance:.3g}", lines, failures)
        result = {"value": sol.value}
    else:  # discounted-continuous
        grid, sigma2, s0 = _continuous_instance(cfg)
        alpha = _coefficient(cfg.get("alpha", "const:1"), grid, "alpha").require_nonnegative("alpha")
        y = float(cfg.get("constraint", {}).get("upper", 0.0)) if cfg.get("constraint") else 0.0
        problem = DiscountedProblem(grid, sigma2, alpha, s0, y)
        sol = optimal_discounted(problem, tol=tol)
        payoff = discounted_shuttle_payoff(sol.s_opt, sigma2, alpha, tol=tol)
        _check("value-vs-series", abs(payoff - sol.value) <= 1e-6 * sol.value,
               f"{payoff:.10g} vs {sol.value:.10g}", lines, failures)
        k = grid.aligned_index(y)
        gaps = []
        for _ in range(30):
            sp = np.array(sol.s_opt.sprime)
            sp[k:] *= np.exp(rng.normal(0.0, 0.4, grid.n_cells - k))
            gaps.append(sol.value -
                        discounted_shuttle_payoff(ScaleDensity(grid, sp), sigma2, alpha,
                                                  tol=tol, check=False))
        _check("dominance", min(gaps) >= -1e-6 * sol.value,
               f"min perturbation gap {min(gaps):.3e}", lines, failures)
        est = simulate_diffusion_shuttle(sol.s_opt, sigma2, alpha=alpha, config=sim)
        allowance = 3.0 * est.se + 4.0 * math.sqrt(sim.step)
        _check("simulation-CI", abs(est.mean - sol.value) <= allowance,
               f"|{est.mean:.6g} - {sol.value:.6g}| vs {allowance:.3g}", lines, failures)
        result = {"value": sol.value}
    for ln in lines:
        print(ln)
    verdict = "PASS" if not failures else "FAIL"
    print(f"verdict              {verdict}")
    result.update({"verdict": verdict, "checks": lines})
    if failures:
        raise VerificationFailure(", ".join(failures))
    return result


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shuttle-ctrl",
        description="Optimal shuttle controls for reflected diffusions and birth-death chains")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("solve", cmd_solve), ("simulate", cmd_simulate), ("verify", cmd_verify)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--json", default=None)
        p.add_argument("--csv", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--grid", type=int, default=None)
        p.add_argument("--tol", type=float, default=None)
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    verify_failed = False
    try:
        cfg = _load_config(args.config, args)
        try:
            result = args.fn(cfg, args)
        except VerificationFailure:
            verify_failed = True
            raise
        doc = {"schema_version": SCHEMA_VERSION, "command": args.command,
               "kind": cfg["kind"], "result": result}
        _emit(doc, args.json)
        return 0
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except DegenerateProblemError as e:
        print(f"degenerate instance: {e}", file=sys.stderr)
        return 3
    except NumericalError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 4
    except VerificationFailure as e:
        print(f"verification FAIL: {e}", file=sys.stderr)
        return 5
    except ShuttleError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
