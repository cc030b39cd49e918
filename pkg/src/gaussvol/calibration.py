"""Derivative-free calibration of the fractional model to vol targets.

The calibrated family is the fractional affine model: power-law kernel with
Hurst exponent ``H``, mean level ``g0(t) = X0 + theta * t^(H+1/2) /
Gamma(H+3/2)``, reversion ``kappa``, vol-of-vol ``nu`` and leverage ``rho``.
The objective is the root-mean-square error, in implied-vol (or skew) units,
between the model values produced by the pricing ladder at a fixed operator
size and the supplied targets.

A Nelder--Mead simplex runs in unconstrained coordinates — ``nu`` through
``exp``, ``rho`` through ``tanh``, ``H`` through the logistic map, the level
parameters through the identity — because the objective passes through an
implied-vol root-finder and a phase-unwrapped determinant, which makes
finite-difference gradients unreliable. Candidates that fail numerically
(impossible prices, branch trouble, overflow) score a large penalty instead
of aborting, so the simplex can walk through bad regions. After the first
descent the search restarts twice from the best point with a shrunk simplex.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Dict, Mapping, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from .errors import ConfigurationError, GaussvolError
from .kernels import FractionalAffineCurve, ModelConfig, RiemannLiouvilleKernel
from .pricing import SkewPoint, SmilePoint, atm_skew, smile

__all__ = [
    "PARAMETER_NAMES",
    "CalibrationProblem",
    "CalibrationResult",
    "decode_parameter",
    "encode_parameter",
    "objective",
    "calibrate",
]

PARAMETER_NAMES = ("X0", "theta", "kappa", "nu", "rho", "H")

_PENALTY = 1e6
_XATOL = 1e-6
_FATOL = 1e-10
_RESTARTS = 2
_PERFECT = 1e-10


def encode_parameter(name: str, value: float) -> float:
    """Map a bounded parameter value to its unconstrained coordinate."""
    if name == "nu":
        return math.log(value)
    if name == "rho":
        return math.atanh(value)
    if name == "H":
        return math.log(value / (1.0 - value))
    return float(value)


def decode_parameter(name: str, x: float) -> float:
    """Inverse of :func:`encode_parameter`."""
    if name == "nu":
        return math.exp(x)
    if name == "rho":
        return math.tanh(x)
    if name == "H":
        if x >= 0.0:
            return 1.0 / (1.0 + math.exp(-x))
        z = math.exp(x)
        return z / (1.0 + z)
    return float(x)


def _check_bound(name: str, value: float, strict: bool) -> None:
    """Validate one parameter value; free parameters use strict bounds."""
    if not (isinstance(value, (int, float)) and math.isfinite(value)):
        raise ConfigurationError(f"{name} must be a finite real, got {value!r}")
    if name == "nu" and (value <= 0.0 if strict else value < 0.0):
        raise ConfigurationError(f"nu must be {'> 0' if strict else '>= 0'}, got {value!r}")
    if name == "rho":
        if strict and not (-1.0 < value < 1.0):
            raise ConfigurationError(f"rho must lie in (-1, 1), got {value!r}")
        if not strict and not (-1.0 <= value <= 1.0):
            raise ConfigurationError(f"rho must lie in [-1, 1], got {value!r}")
    if name == "H" and not (0.0 < value < 1.0):
        raise ConfigurationError(f"H must lie in (0, 1), got {value!r}")


@dataclass(frozen=True)
class CalibrationProblem:
    """Targets, parameter split, starting point and evaluation budget.

    Attributes
    ----------
    targets : sequence
        Nonempty, all :class:`~gaussvol.pricing.SmilePoint` or all
        :class:`~gaussvol.pricing.SkewPoint` (one kind per problem).
    free_params : sequence of str
        Nonempty subset of ``PARAMETER_NAMES`` to optimise.
    fixed_values : mapping
        Values for exactly the remaining parameters (``nu = 0`` and
        ``|rho| = 1`` are allowed here — only free parameters must stay
        strictly inside the open bounds).
    init : mapping
        Starting values for exactly the free parameters, strictly within
        bounds (``nu > 0``, ``rho`` in (-1, 1), ``H`` in (0, 1)).
    budget : int
        Maximum objective evaluations across the whole search.
    n, n_cos, big_l, skew_step : numerics
        Pricing resolution used for every candidate (fixed so that model
        and targets share one discretisation).
    """

    targets: Sequence
    free_params: Sequence[str]
    fixed_values: Mapping[str, float]
    init: Mapping[str, float]
    budget: int
    n: int = 256
    n_cos: int = 128
    big_l: float = 12.0
    skew_step: float = 5e-3

    def __post_init__(self) -> None:
        targets = tuple(self.targets)
        if not targets:
            raise ConfigurationError("targets must be nonempty")
        if all(isinstance(t, SmilePoint) for t in targets):
            kind = "smile"
        elif all(isinstance(t, SkewPoint) for t in targets):
            kind = "skew"
        else:
            raise ConfigurationError(
                "targets must be all SmilePoint or all SkewPoint"
            )
        free = tuple(self.free_params)
        if not free:
            raise ConfigurationError("free_params must be nonempty")
        unknown = [p for p in free if p not in PARAMETER_NAMES]
        if unknown or len(set(free)) != len(free):
            raise ConfigurationError(
                f"free_params must be distinct names from {PARAMETER_NAMES}, "
                f"got {self.free_params!r}"
            )
        fixed = dict(self.fixed_values)
        expected_fixed = set(PARAMETER_NAMES) - set(free)
        if set(fixed) != expected_fixed:
            raise ConfigurationError(
                f"fixed_values must cover exactly {sorted(expected_fixed)}, "
                f"got {sorted(fixed)}"
            )
        for name, value in fixed.items():
            _check_bound(name, value, strict=False)
        init = dict(self.init)
        if set(init) != set(free):
            raise ConfigurationError(
                f"init must cover exactly the free parameters {sorted(free)}, "
                f"got {sorted(init)}"
            )
        for name, value in init.items():
            _check_bound(name, value, strict=True)
        if not isinstance(self.budget, (int, np.integer)) or self.budget < 1:
            raise ConfigurationError(
                f"budget must be a positive integer, got {self.budget!r}"
            )
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise ConfigurationError(f"n must be an integer >= 2, got {self.n!r}")
        if not isinstance(self.n_cos, (int, np.integer)) or self.n_cos < 16:
            raise ConfigurationError(
                f"n_cos must be an integer >= 16, got {self.n_cos!r}"
            )
        if not (isinstance(self.big_l, (int, float)) and self.big_l >= 6.0):
            raise ConfigurationError(f"big_l must be >= 6, got {self.big_l!r}")
        if not (
            isinstance(self.skew_step, (int, float))
            and 1e-4 < self.skew_step <= 0.05
        ):
            raise ConfigurationError(
                f"skew_step must lie in (1e-4, 0.05], got {self.skew_step!r}"
            )
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "free_params", free)
        object.__setattr__(self, "fixed_values", fixed)
        object.__setattr__(self, "init", init)
        object.__setattr__(self, "_kind", kind)


@dataclass(frozen=True)
class CalibrationResult:
    """Best point found, its objective, the cost, and the visit history.

    Attributes
    ----------
    params : dict
        Full parameter dictionary (free and fixed merged) at the best
        evaluated point — never worse than the starting point.
    objective : float
        Root-mean-square target error at ``params``.
    evaluations : int
        Objective evaluations consumed.
    trace : tuple
        ``(params_dict, value)`` per evaluation, in evaluation order.
    budget_exhausted : bool
        True when the search stopped because the budget ran out rather
        than because the simplex collapsed.
    """

    params: Dict[str, float]
    objective: float
    evaluations: int
    trace: Tuple
    budget_exhausted: bool


def _build_model(params: Mapping[str, float]) -> ModelConfig:
    return ModelConfig(
        s0=1.0,
        kernel=RiemannLiouvilleKernel(hurst=params["H"]),
        curve=FractionalAffineCurve(x0=params["X0"], theta=params["theta"]),
        kappa=params["kappa"],
        nu=params["nu"],
        rho=params["rho"],
        horizon=1.0,
    )


def _evaluate(problem: CalibrationProblem, params: Mapping[str, float]) -> float:
    """RMSE of the candidate against the targets; failures score 1e6."""
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            model = _build_model(params)
            residuals = []
            if problem._kind == "smile":
                by_maturity: Dict[float, list] = {}
                for target in problem.targets:
                    by_maturity.setdefault(target.maturity, []).append(target)
                for maturity, group in by_maturity.items():
                    strikes = [math.exp(t.k) for t in group]
                    points = smile(
                        model,
                        problem.n,
                        strikes,
                        maturity,
                        n_cos=problem.n_cos,
                        L=problem.big_l,
                    )
                    if len(points) != len(group):
                        return _PENALTY
                    residuals.extend(
                        p.iv - t.iv for p, t in zip(points, group)
                    )
            else:
                for target in problem.targets:
                    point = atm_skew(
                        model,
                        problem.n,
                        target.maturity,
                        h=problem.skew_step,
                        n_cos=problem.n_cos,
                        L=problem.big_l,
                    )
                    residuals.append(point.skew - target.skew)
        value = math.sqrt(sum(r * r for r in residuals) / len(residuals))
    except (GaussvolError, np.linalg.LinAlgError, OverflowError):
        return _PENALTY
    if not math.isfinite(value):
        return _PENALTY
    return value


def objective(problem: CalibrationProblem, candidate: Mapping[str, float]) -> float:
    """Root-mean-square target error of one candidate.

    Parameters
    ----------
    problem : CalibrationProblem
        Targets and the fixed parameter values.
    candidate : mapping
        Values for exactly the free parameters.

    Returns
    -------
    float
        RMSE in implied-vol (or skew) units; numerically failed candidates
        score the penalty value 1e6 instead of raising.
    """
    candidate = dict(candidate)
    if set(candidate) != set(problem.free_params):
        raise ConfigurationError(
            f"candidate must provide exactly {sorted(problem.free_params)}, "
            f"got {sorted(candidate)}"
        )
    for name, value in candidate.items():
        if not (isinstance(value, (int, float)) and math.isfinite(value)):
            raise ConfigurationError(
                f"candidate {name} must be a finite real, got {value!r}"
            )
    return _evaluate(problem, {**problem.fixed_values, **candidate})


class _BudgetExhausted(Exception):
    pass


def calibrate(problem: CalibrationProblem) -> CalibrationResult:
    """Fit the free parameters by a budgeted simplex search.

    The search runs Nelder--Mead in unconstrained coordinates, stops each
    descent when the simplex diameter falls below 1e-6 (or the budget runs
    out), and restarts twice from the best point with a shrunk simplex.
    The best point ever evaluated is returned, so the result is never worse
    than the starting point; exhausting the budget sets a status flag
    rather than raising.

    Parameters
    ----------
    problem : CalibrationProblem
        Validated problem definition.

    Returns
    -------
    CalibrationResult
        Best parameters (free and fixed merged), objective, evaluation
        count, per-evaluation trace and the budget flag.
    """
    names = problem.free_params
    trace = []
    best: Dict[str, object] = {"params": None, "value": math.inf}

    def wrapped(x: np.ndarray) -> float:
        if len(trace) >= problem.budget:
            raise _BudgetExhausted
        candidate = {
            name: decode_parameter(name, float(coord))
            for name, coord in zip(names, x)
        }
        params = {**problem.fixed_values, **candidate}
        value = _evaluate(problem, params)
        trace.append((params, value))
        if value < best["value"]:
            best["params"] = params
            best["value"] = value
        return value

    x_start = np.array(
        [encode_parameter(name, problem.init[name]) for name in names]
    )
    exhausted = False
    try:
        wrapped(x_start)  # anchor: the starting point is always evaluated
        for run in range(1 + _RESTARTS):
            if len(trace) >= problem.budget or best["value"] <= _PERFECT:
                break
            options = {
                "xatol": _XATOL,
                "fatol": _FATOL,
                "maxfev": problem.budget - len(trace),
            }
            if run == 0:
                x0 = x_start
            else:
                # Restart from the best point with a shrunk simplex.
                x0 = np.array(
                    [encode_parameter(name, best["params"][name]) for name in names]
                )
                shrink = 0.1**run
                steps = np.where(
                    x0 != 0.0, 0.05 * np.abs(x0) * shrink, 0.00025 * shrink
                )
                simplex = np.vstack([x0, x0 + np.diag(steps)])
                options["initial_simplex"] = simplex
            minimize(wrapped, x0, method="Nelder-Mead", options=options)
    except _BudgetExhausted:
        exhausted = True
    return CalibrationResult(
        params=dict(best["params"]),
        objective=float(best["value"]),
        evaluations=len(trace),
        trace=tuple(trace),
        budget_exhausted=exhausted or len(trace) >= problem.budget,
    )
