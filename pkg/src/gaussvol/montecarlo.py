"""Exact-Gaussian-path Monte Carlo oracle.

Paths of the volatility process are drawn from the exact joint Gaussian law
of the discretised model: the noise vector ``(eps, dW)`` — the stochastic
convolution sampled at the grid times together with the Brownian increments
that drive the price — has covariance assembled from the forward covariance
matrix, the kernel cell integrals (by the isometry of the stochastic
integrals over subintervals) and ``(T/n) I``. The mean-reversion drift is
applied by solving the unit-diagonal triangular system ``(I - kappa K) X =
g + eps`` exactly, the log-price evolves by the left-point rule, and the
integrated variance is the left Riemann sum, so the simulated triple matches
the law targeted by the transform evaluator step for step.

Normals come from the inverse CDF applied to uniforms of a PCG64 generator
(period well above 2^128), which makes antithetic mirroring exact; paths are
generated in fixed-size chunks so memory stays bounded and results for a
given seed do not depend on how the path count aligns with the chunks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterator, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import solve_triangular
from scipy.special import ndtri

from .charfn import TransformQuery
from .errors import ConfigurationError, DomainError, SingularMatrixError
from .kernels import DiscretizedModel, ModelConfig, discretize

__all__ = ["SimulationPlan", "SimulatedPaths", "simulate_paths", "mc_call_price", "mc_joint_transform"]

# Paths per chunk (antithetic chunks hold this many paths as mirrored pairs).
_CHUNK = 8192
_JITTER = 1e-12


@dataclass(frozen=True)
class SimulationPlan:
    """Path count, step count, seed and pairing flag for one simulation.

    Attributes
    ----------
    n_steps : int
        Time steps on the uniform grid, at least 2.
    n_paths : int
        Paths to draw, at least 2; must be even when ``antithetic`` is set
        so every path has its mirror partner.
    seed : int
        64-bit unsigned generator seed.
    antithetic : bool
        Mirror every draw to form antithetic pairs (default off).
    """

    n_steps: int
    n_paths: int
    seed: int
    antithetic: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.n_steps, (int, np.integer)) or self.n_steps < 2:
            raise ConfigurationError(
                f"n_steps must be an integer >= 2, got {self.n_steps!r}"
            )
        if not isinstance(self.n_paths, (int, np.integer)) or self.n_paths < 2:
            raise ConfigurationError(
                f"n_paths must be an integer >= 2, got {self.n_paths!r}"
            )
        if not isinstance(self.seed, (int, np.integer)) or not (
            0 <= int(self.seed) < 2**64
        ):
            raise ConfigurationError(
                f"seed must be a 64-bit unsigned integer, got {self.seed!r}"
            )
        if self.antithetic and self.n_paths % 2 != 0:
            raise ConfigurationError(
                f"n_paths must be even with antithetic pairing, got {self.n_paths!r}"
            )


@dataclass(frozen=True)
class SimulatedPaths:
    """Simulation output: one row per path.

    Attributes
    ----------
    x : ndarray, shape (n_paths, n_steps)
        Volatility process at the left grid points.
    terminal_log_price : ndarray, shape (n_paths,)
        ``ln S_T`` under the left-point evolution rule.
    integrated_variance : ndarray, shape (n_paths,)
        Left Riemann sum of ``X^2``.
    """

    x: NDArray[np.float64]
    terminal_log_price: NDArray[np.float64]
    integrated_variance: NDArray[np.float64]


class _PathEngine:
    """Factorised noise model plus chunked feature generation."""

    def __init__(self, model: ModelConfig, plan: SimulationPlan):
        self.model = model
        self.plan = plan
        self.disc: DiscretizedModel = discretize(model, int(plan.n_steps))
        n = int(plan.n_steps)
        self.n = n
        self.delta = self.disc.step
        self.sqrt_delta = math.sqrt(self.delta)
        if model.nu > 0.0:
            # Joint Gaussian vector (eps_1..eps_{n-1}, dW_0..dW_{n-1}); the
            # first convolution coordinate is deterministically zero (the
            # covariance row at t_0 = 0 vanishes) and is excluded.
            sig = self.disc.Sigma_mat[1:, 1:]
            cross = model.nu * self.disc.K_mat[1:, :]
            joint = np.block(
                [[sig, cross], [cross.T, self.delta * np.eye(n)]]
            )
            self.chol = self._factor(joint)
            self.correlated_rows = 2 * n - 1
        else:
            self.chol = None
            self.correlated_rows = n
        # Rows of uniforms per path: correlated block plus the orthogonal
        # Brownian increments driving the price.
        self.rows = self.correlated_rows + n
        if model.kappa != 0.0:
            self.drift_factor = np.eye(n) - model.kappa * self.disc.K_mat
        else:
            self.drift_factor = None
        self.rng = np.random.default_rng(int(plan.seed))

    @staticmethod
    def _factor(joint: NDArray[np.float64]) -> NDArray[np.float64]:
        try:
            return np.linalg.cholesky(joint)
        except np.linalg.LinAlgError:
            jittered = joint + _JITTER * np.eye(joint.shape[0])
            try:
                return np.linalg.cholesky(jittered)
            except np.linalg.LinAlgError as exc:
                raise SingularMatrixError(
                    "joint noise covariance is not positive definite even "
                    f"after diagonal jitter {_JITTER:g}"
                ) from exc

    def _normals(self, count: int) -> NDArray[np.float64]:
        uniforms = self.rng.random((self.rows, count))
        # Affine nudge into the open interval so the inverse CDF stays finite.
        uniforms = uniforms * (1.0 - 2.0**-52) + 2.0**-53
        return ndtri(uniforms)

    def _x_and_db(
        self, normals: NDArray[np.float64]
    ) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Map standard normals to volatility paths and price-noise steps."""
        n = self.n
        model = self.model
        if self.chol is not None:
            correlated = self.chol @ normals[: self.correlated_rows]
            eps = np.vstack([np.zeros((1, normals.shape[1])), correlated[: n - 1]])
            d_w = correlated[n - 1 :]
        else:
            eps = np.zeros((n, normals.shape[1]))
            d_w = self.sqrt_delta * normals[:n]
        d_w_perp = self.sqrt_delta * normals[self.correlated_rows :]
        driver = self.disc.g_vec[:, None] + eps
        if self.drift_factor is not None:
            x = solve_triangular(
                self.drift_factor, driver, lower=True, unit_diagonal=True
            )
        else:
            x = driver
        d_b = model.rho * d_w + math.sqrt(1.0 - model.rho**2) * d_w_perp
        return x, d_b

    def _features_from_normals(
        self, normals: NDArray[np.float64], want_x: bool
    ) -> Tuple:
        x, d_b = self._x_and_db(normals)
        x_sq = x * x
        log_s = (
            math.log(self.model.s0)
            - 0.5 * self.delta * np.sum(x_sq, axis=0)
            + np.sum(x * d_b, axis=0)
        )
        int_var = self.delta * np.sum(x_sq, axis=0)
        return (x.T if want_x else None), log_s, int_var

    def chunks(self, want_x: bool = False) -> Iterator[Tuple]:
        """Yield per-chunk features; antithetic chunks interleave mirrors.

        Each yielded triple is ``(x or None, log_s, int_var)`` with paths
        along the first axis; under antithetic pairing the arrays hold the
        direct paths followed by their mirrors (same length each).
        """
        remaining = int(self.plan.n_paths)
        if self.plan.antithetic:
            remaining //= 2
            per_chunk = _CHUNK // 2
        else:
            per_chunk = _CHUNK
        while remaining > 0:
            count = min(per_chunk, remaining)
            remaining -= count
            normals = self._normals(count)
            direct = self._features_from_normals(normals, want_x)
            if not self.plan.antithetic:
                yield direct
                continue
            mirror = self._features_from_normals(-normals, want_x)
            x_block = None
            if want_x:
                x_block = np.vstack([direct[0], mirror[0]])
            yield (
                x_block,
                np.concatenate([direct[1], mirror[1]]),
                np.concatenate([direct[2], mirror[2]]),
            )


def simulate_paths(model: ModelConfig, plan: SimulationPlan) -> SimulatedPaths:
    """Draw exact Gaussian paths of the volatility and evolve the price.

    The volatility path, the terminal log-price and the integrated variance
    of every path are returned; memory scales as ``n_paths * n_steps``
    floats, so prefer :func:`mc_call_price` / :func:`mc_joint_transform`
    (which stream over path chunks) for large plans.

    Parameters
    ----------
    model : ModelConfig
        Model to simulate (the kernel acts through its discretised cell
        integrals and forward covariance).
    plan : SimulationPlan
        Path count, step count, seed and pairing flag.

    Returns
    -------
    SimulatedPaths
        Per-path volatility grid values, terminal log-price and integrated
        variance; under antithetic pairing mirrored partners are adjacent
        blocks within each generation chunk.

    Raises
    ------
    SingularMatrixError
        If the joint noise covariance cannot be factorised even after one
        retry with diagonal jitter 1e-12.
    """
    engine = _PathEngine(model, plan)
    xs = []
    log_ss = []
    int_vars = []
    for x_block, log_s, int_var in engine.chunks(want_x=True):
        xs.append(x_block)
        log_ss.append(log_s)
        int_vars.append(int_var)
    return SimulatedPaths(
        x=np.vstack(xs),
        terminal_log_price=np.concatenate(log_ss),
        integrated_variance=np.concatenate(int_vars),
    )


def _mean_and_stderr(total: float, total_sq: float, count: int) -> Tuple[float, float]:
    mean = total / count
    if count < 2:
        return mean, 0.0
    variance = max(total_sq - count * mean * mean, 0.0) / (count - 1)
    return mean, math.sqrt(variance / count)


def mc_call_price(
    model: ModelConfig, plan: SimulationPlan, strike: float, maturity: float
):
    """Monte Carlo European call price with standard error and 95% interval.

    Parameters
    ----------
    model : ModelConfig
        Model parameters; the horizon field is replaced by ``maturity``.
    plan : SimulationPlan
        Simulation plan; with antithetic pairing the standard error is
        computed over pair means.
    strike, maturity : float
        Strike and maturity, positive.

    Returns
    -------
    (float, float, (float, float))
        Price, standard error, and the 95% confidence interval
        ``price -+ 1.96 stderr``.
    """
    for name, val in (("strike", strike), ("maturity", maturity)):
        if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
            raise ConfigurationError(f"{name} must be positive, got {val!r}")
    engine = _PathEngine(replace(model, horizon=float(maturity)), plan)
    total = 0.0
    total_sq = 0.0
    count = 0
    for _, log_s, _ in engine.chunks():
        payoff = np.maximum(np.exp(log_s) - strike, 0.0)
        if plan.antithetic:
            half = payoff.size // 2
            payoff = 0.5 * (payoff[:half] + payoff[half:])
        total += float(np.sum(payoff))
        total_sq += float(np.sum(payoff * payoff))
        count += payoff.size
    price, stderr = _mean_and_stderr(total, total_sq, count)
    return price, stderr, (price - 1.96 * stderr, price + 1.96 * stderr)


def mc_joint_transform(model: ModelConfig, plan: SimulationPlan, u: complex, w: complex):
    """Monte Carlo estimate of the joint transform at one admissible point.

    The sample mean of ``exp(u ln(S_T/S0) + w int X^2)`` is scaled by
    ``S0^u``; admissibility keeps the integrand's modulus bounded, so the
    plain mean is well behaved.

    Parameters
    ----------
    model : ModelConfig
        Model to simulate at its own horizon.
    plan : SimulationPlan
        Simulation plan; antithetic pairing averages mirrored draws.
    u, w : complex
        Transform arguments, ``0 <= Re(u) <= 1`` and ``Re(w) <= 0``.

    Returns
    -------
    (complex, float)
        The estimate and one real standard error — the root sum of squares
        of the componentwise (real and imaginary) standard errors.

    Raises
    ------
    DomainError
        If ``(u, w)`` is inadmissible.
    """
    u = complex(u)
    w = complex(w)
    if not TransformQuery(u, w).admissible:
        raise DomainError(
            f"(u, w) = ({u!r}, {w!r}) lies outside the admissible region "
            "0 <= Re(u) <= 1, Re(w) <= 0"
        )
    engine = _PathEngine(model, plan)
    log_s0 = math.log(model.s0)
    scale = np.exp(u * log_s0)
    total = 0.0 + 0.0j
    total_sq_re = 0.0
    total_sq_im = 0.0
    count = 0
    for _, log_s, int_var in engine.chunks():
        values = np.exp(u * (log_s - log_s0) + w * int_var)
        if plan.antithetic:
            half = values.size // 2
            values = 0.5 * (values[:half] + values[half:])
        total += complex(np.sum(values))
        total_sq_re += float(np.sum(values.real**2))
        total_sq_im += float(np.sum(values.imag**2))
        count += values.size
    mean_re, se_re = _mean_and_stderr(total.real, total_sq_re, count)
    mean_im, se_im = _mean_and_stderr(total.imag, total_sq_im, count)
    estimate = complex(scale) * complex(mean_re, mean_im)
    # The spot factor rotates/scales both error components together.
    stderr = abs(complex(scale)) * math.hypot(se_re, se_im)
    return estimate, stderr


def _display_paths(
    model: ModelConfig, plan: SimulationPlan, count: int
) -> Tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """Full volatility and log-price paths for a small display sample.

    Returns ``(grid, x, log_price)``: ``grid`` holds the ``n_steps + 1``
    grid times, ``x`` is ``(count, n_steps)`` at the left endpoints and
    ``log_price`` is ``(count, n_steps)`` with column ``i`` the log-price
    at ``grid[i + 1]`` (the price starts at ``log s0`` at time zero). The
    draws use the plan's seed but are not the chunked estimator stream.
    """
    engine = _PathEngine(model, plan)
    normals = engine._normals(int(count))
    x, d_b = engine._x_and_db(normals)
    increments = -0.5 * engine.delta * (x * x) + x * d_b
    log_path = math.log(model.s0) + np.cumsum(increments, axis=0)
    return engine.disc.grid, x.T, log_path.T
