"""Joint Fourier-Laplace transform of log-price and integrated variance.

For the model

    dS_t = S_t X_t dB_t,   B = rho W + sqrt(1 - rho^2) W_perp,

with ``X`` the Gaussian Volterra process of :mod:`gaussvol.kernels`, the
quantity computed here is

    E[ exp( u ln S_T + w * integral_0^T X_s^2 ds ) ],

for complex ``u`` in the strip ``0 <= Re(u) <= 1`` and ``Re(w) <= 0``. The
value is assembled from the operator layer as
``exp(u ln S0 + quad - logdet / 2)``.

Two independent oracles live alongside the main evaluator:

* :func:`markovian_transform` integrates the backward Riccati system that the
  transform reduces to when the kernel is constant (classical Markovian
  stochastic volatility), with a classical fixed-step fourth-order scheme;
* :func:`symmetric_spectral_transform` evaluates the closed-form product over
  kernel eigenmodes available when the kernel is symmetric with known
  spectrum, each mode contributing a two-dimensional Gaussian quadratic-form
  expectation; :func:`symmetric_operator_transform` evaluates the same
  quantity through the sandwiched operator determinant on a midpoint grid,
  so the two routes check each other.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import lu_solve

from .errors import ConfigurationError, DomainError, SingularMatrixError
from .kernels import ModelConfig, discretize
from .operators import (
    RiccatiCoefficients,
    _factor,
    _logdet_from_factor,
    _transform_parts,
    transform_log_value,
)
from .specfun import _unwrap_angles, principal_sqrt

__all__ = [
    "TransformQuery",
    "TransformValue",
    "joint_transform",
    "transform_curve",
    "markovian_transform",
    "symmetric_spectral_transform",
    "symmetric_operator_transform",
]

_DOMAIN_TOL = 1e-12


@dataclass(frozen=True)
class TransformQuery:
    """One evaluation point ``(u, w)`` of the joint transform."""

    u: complex
    w: complex

    @property
    def admissible(self) -> bool:
        """True iff ``0 <= Re(u) <= 1`` and ``Re(w) <= 0`` (up to 1e-12)."""
        u = complex(self.u)
        w = complex(self.w)
        return (
            -_DOMAIN_TOL <= u.real <= 1.0 + _DOMAIN_TOL
            and w.real <= _DOMAIN_TOL
        )


@dataclass(frozen=True)
class TransformValue:
    """Transform evaluation broken into its exponent pieces.

    ``value = exp(u ln S0 + quad - logdet_unwrapped / 2)``. For a single
    evaluation the stored log-determinant is the principal branch; curve
    evaluations restore branch continuity before assembling values.
    """

    value: complex
    quad: complex
    logdet_unwrapped: complex


def _require_admissible(u: complex, w: complex) -> None:
    if not TransformQuery(u, w).admissible:
        raise DomainError(
            f"(u, w) = ({u!r}, {w!r}) lies outside the admissible region "
            "0 <= Re(u) <= 1, Re(w) <= 0"
        )


def joint_transform(model: ModelConfig, n: int, query: TransformQuery) -> TransformValue:
    """Evaluate the joint transform at one admissible query point.

    Parameters
    ----------
    model : ModelConfig
        Model configuration.
    n : int
        Grid size for the operator discretisation, at least 2.
    query : TransformQuery
        Evaluation point; must be admissible.

    Returns
    -------
    TransformValue
        Value together with the quadratic form and the (principal branch)
        log-determinant that built it.

    Raises
    ------
    DomainError
        If the query is inadmissible.
    """
    if not isinstance(query, TransformQuery):
        query = TransformQuery(*query)
    _require_admissible(query.u, query.w)
    disc = discretize(model, n)
    coeff = RiccatiCoefficients.from_query(
        query.u, query.w, model.kappa, model.nu, model.rho
    )
    quad, logdet = transform_log_value(disc, coeff)
    value = cmath.exp(
        complex(query.u) * math.log(model.s0) + quad - 0.5 * logdet
    )
    return TransformValue(value=value, quad=quad, logdet_unwrapped=logdet)


def transform_curve(
    model: ModelConfig,
    n: int,
    z_grid: Sequence[float],
    w: complex = 0.0,
) -> NDArray[np.complex128]:
    """Transform values along ``u = i z`` for a monotone frequency grid.

    Evaluates ``E[exp(i z_k ln S_T + w int X^2)]`` for every ``z_k``,
    restoring log-determinant branch continuity along the grid: the phase is
    unwrapped walking outward along the grid, anchored at ``z = 0`` where the
    determinant is real positive.

    Parameters
    ----------
    model : ModelConfig
        Model configuration.
    n : int
        Grid size for the operator discretisation.
    z_grid : sequence of float
        Strictly monotone frequencies starting at exactly 0; usually
        increasing, but a mirrored (decreasing) grid is accepted so that the
        Hermitian symmetry ``value(-z) = conj(value(z))`` can be checked.
    w : complex, optional
        Laplace argument, ``Re(w) <= 0``; default 0.

    Returns
    -------
    numpy.ndarray
        Complex transform values, one per frequency.

    Raises
    ------
    DomainError
        If ``w`` is inadmissible.
    ConfigurationError
        If the frequency grid is not strictly monotone from 0.
    PhaseUnwrapError
        If consecutive determinant phases jump by ``pi`` or more — the
        frequency grid is too coarse for branch tracking and must be refined.
    """
    z = np.asarray(z_grid, dtype=float)
    if z.ndim != 1 or z.size == 0:
        raise ConfigurationError("z_grid must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(z)):
        raise ConfigurationError("z_grid entries must be finite")
    if z[0] != 0.0:
        raise ConfigurationError(f"z_grid must start at 0, got {z[0]!r}")
    if z.size > 1:
        steps = np.diff(z)
        if not (np.all(steps > 0.0) or np.all(steps < 0.0)):
            raise ConfigurationError("z_grid must be strictly monotone")
    _require_admissible(0.0, w)
    disc = discretize(model, n)
    return _curve_core(
        disc, model.kappa, model.nu, model.rho, math.log(model.s0), z, w
    )


def _curve_core(disc, kappa, nu, rho, log_s0, z, w):
    """Branch-tracked transform values on a validated frequency grid.

    Shared by :func:`transform_curve` and callers that want to reuse one
    discretisation across several grids (the pricing layer builds the
    cumulant probe and the full frequency grid from the same operator).
    """
    kkt = disc.K_mat @ disc.K_mat.T
    quads = np.empty(z.size, dtype=complex)
    logabs = np.empty(z.size, dtype=float)
    phases = np.empty(z.size, dtype=float)
    for idx, z_k in enumerate(z):
        coeff = RiccatiCoefficients.from_query(1j * z_k, w, kappa, nu, rho)
        quad_k, logabs_k, phase_k = _transform_parts(disc, coeff, kkt)
        quads[idx] = quad_k
        logabs[idx] = logabs_k
        phases[idx] = phase_k
    unwrapped = _unwrap_angles(phases)
    exponents = 1j * z * log_s0 + quads - 0.5 * (logabs + 1j * unwrapped)
    return np.exp(exponents)


# ---------------------------------------------------------------------------
# Markovian Riccati-ODE oracle
# ---------------------------------------------------------------------------


_BLOWUP_LIMIT = 1e8


def _riccati_backward(
    lam: NDArray[np.complex128],
    src: NDArray[np.complex128],
    theta: float,
    nu: float,
    horizon: float,
    n_steps: int,
) -> tuple:
    """Integrate the backward Riccati system from the terminal time to 0.

    Works in the time-to-maturity variable, so the zero terminal condition
    becomes a zero initial condition; all entries of ``lam``/``src`` advance
    in lockstep. Returns the coefficient triple at time 0.
    """
    a_coef = np.zeros_like(lam)
    b_coef = np.zeros_like(lam)
    c_coef = np.zeros_like(lam)
    h = horizon / n_steps
    nu2 = nu * nu

    def rhs(b_cur, c_cur):
        dc = 2.0 * nu2 * c_cur * c_cur + 2.0 * lam * c_cur + src
        db = 2.0 * theta * c_cur + (lam + 2.0 * nu2 * c_cur) * b_cur
        da = theta * b_cur + 0.5 * nu2 * b_cur * b_cur + nu2 * c_cur
        return da, db, dc

    for _ in range(n_steps):
        a1, b1, c1 = rhs(b_coef, c_coef)
        a2, b2, c2 = rhs(b_coef + 0.5 * h * b1, c_coef + 0.5 * h * c1)
        a3, b3, c3 = rhs(b_coef + 0.5 * h * b2, c_coef + 0.5 * h * c2)
        a4, b4, c4 = rhs(b_coef + h * b3, c_coef + h * c3)
        a_coef = a_coef + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        b_coef = b_coef + (h / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        c_coef = c_coef + (h / 6.0) * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
        if np.max(np.abs(c_coef)) > _BLOWUP_LIMIT:
            raise DomainError(
                "the backward Riccati solution blew up before reaching "
                "time 0; the transform does not exist at this (u, w)"
            )
    return a_coef, b_coef, c_coef


def markovian_transform(
    s0: float,
    x0: float,
    theta: float,
    kappa: float,
    nu: float,
    rho: float,
    horizon: float,
    u: complex,
    w: complex,
    n_steps: int = 20000,
) -> complex:
    """Transform of the Markovian (constant-kernel) model via Riccati ODEs.

    The constant-kernel model is the classical one-factor stochastic
    volatility diffusion ``dX = (theta + kappa X) dt + nu dW``; its joint
    transform is ``exp(u ln s0 + A + B x0 + C x0^2)`` where ``(A, B, C)``
    solve a backward Riccati system with zero terminal values. The system is
    integrated with the classical fourth-order one-step method at fixed step
    ``horizon / n_steps``.

    Parameters
    ----------
    s0, x0 : float
        Initial price (positive) and initial volatility level.
    theta, kappa : float
        Drift parameters of the volatility process.
    nu : float
        Volatility-of-volatility, non-negative.
    rho : float
        Leverage correlation in ``[-1, 1]``.
    horizon : float
        Terminal time, positive.
    u, w : complex
        Transform arguments.
    n_steps : int, optional
        Number of integration steps (default 20000, i.e. step T/20000); the
        result is stable to 1e-8 under halving the step.

    Returns
    -------
    complex
        The transform value.

    Raises
    ------
    DomainError
        If the Riccati solution blows up (transform does not exist there).
    """
    if not (isinstance(s0, (int, float)) and math.isfinite(s0) and s0 > 0):
        raise ConfigurationError(f"s0 must be positive, got {s0!r}")
    if not (math.isfinite(horizon) and horizon > 0):
        raise ConfigurationError(f"horizon must be positive, got {horizon!r}")
    if not (math.isfinite(nu) and nu >= 0):
        raise ConfigurationError(f"nu must be non-negative, got {nu!r}")
    if not (math.isfinite(rho) and -1.0 <= rho <= 1.0):
        raise ConfigurationError(f"rho must lie in [-1, 1], got {rho!r}")
    if not isinstance(n_steps, (int, np.integer)) or n_steps < 100:
        raise ConfigurationError(f"n_steps must be an integer >= 100, got {n_steps!r}")
    u = complex(u)
    w = complex(w)
    lam = np.array([kappa + rho * nu * u], dtype=complex)
    src = np.array([w + 0.5 * (u * u - u)], dtype=complex)
    a_coef, b_coef, c_coef = _riccati_backward(
        lam, src, float(theta), float(nu), float(horizon), int(n_steps)
    )
    exponent = (
        u * math.log(s0)
        + a_coef[0]
        + b_coef[0] * x0
        + c_coef[0] * x0 * x0
    )
    return complex(cmath.exp(exponent))


def _markovian_curve(
    s0: float,
    x0: float,
    theta: float,
    kappa: float,
    nu: float,
    rho: float,
    horizon: float,
    z_grid: NDArray[np.float64],
    w: complex = 0.0,
    n_steps: int = 20000,
) -> NDArray[np.complex128]:
    """Vectorised Riccati-ODE transform along ``u = i z`` (oracle plumbing)."""
    z = np.asarray(z_grid, dtype=float)
    u = 1j * z
    lam = kappa + rho * nu * u
    src = w + 0.5 * (u * u - u)
    a_coef, b_coef, c_coef = _riccati_backward(
        lam.astype(complex),
        src.astype(complex),
        float(theta),
        float(nu),
        float(horizon),
        int(n_steps),
    )
    exponent = u * math.log(s0) + a_coef + b_coef * x0 + c_coef * x0 * x0
    return np.exp(exponent)


# ---------------------------------------------------------------------------
# Symmetric-kernel oracles
# ---------------------------------------------------------------------------


def _symmetric_inputs(lambdas, g_coeffs, nu, rho, u, w):
    lam = np.asarray(lambdas, dtype=float)
    coeffs = np.asarray(g_coeffs, dtype=float)
    if lam.ndim != 1 or coeffs.shape != lam.shape:
        raise ConfigurationError(
            "lambdas and g_coeffs must be 1-D sequences of equal length"
        )
    if not (np.all(np.isfinite(lam)) and np.all(lam >= 0.0)):
        raise ConfigurationError("lambdas must be finite and non-negative")
    if not np.all(np.isfinite(coeffs)):
        raise ConfigurationError("g_coeffs must be finite")
    if not (math.isfinite(nu) and nu >= 0):
        raise ConfigurationError(f"nu must be non-negative, got {nu!r}")
    if not (math.isfinite(rho) and -1.0 <= rho <= 1.0):
        raise ConfigurationError(f"rho must lie in [-1, 1], got {rho!r}")
    u = complex(u)
    w = complex(w)
    if abs(u.real) > _DOMAIN_TOL or w.real > _DOMAIN_TOL:
        raise DomainError(
            "the symmetric-kernel transform requires Re(u) = 0 and "
            f"Re(w) <= 0, got u={u!r}, w={w!r}"
        )
    return lam, coeffs, u, w


def symmetric_spectral_transform(
    lambdas: Sequence[float],
    g_coeffs: Sequence[float],
    nu: float,
    rho: float,
    u: complex,
    w: complex,
) -> complex:
    """Closed-form transform for a symmetric kernel with known spectrum.

    For a symmetric kernel with eigenvalues ``sqrt(lambdas)`` (of the kernel
    operator itself; ``lambdas`` are the squares) and input-curve coefficients
    ``g_coeffs`` in the same eigenbasis, the transform factorises over modes:

        exp( (alpha + beta^2/2) * sum c_n^2 / d_n ) / prod sqrt(d_n),

    with ``alpha = w + (u^2 - u)/2 - rho^2 u^2 / 2``, ``beta = rho u`` and
    ``d_n = 1 - 2 beta nu sqrt(lambda_n) - 2 alpha nu^2 lambda_n``; the square
    roots are principal, mode by mode.

    Parameters
    ----------
    lambdas : sequence of float
        Non-negative squared eigenvalues, finitely many.
    g_coeffs : sequence of float
        Eigenbasis coefficients of the input curve, one per mode.
    nu, rho : float
        Volatility-of-volatility and leverage correlation.
    u, w : complex
        Transform arguments with ``Re(u) = 0`` and ``Re(w) <= 0``.

    Returns
    -------
    complex
        The transform value (initial price normalised to 1).

    Raises
    ------
    DomainError
        Outside ``Re(u) = 0``, ``Re(w) <= 0``.
    """
    lam, coeffs, u, w = _symmetric_inputs(lambdas, g_coeffs, nu, rho, u, w)
    alpha = w + 0.5 * (u * u - u) - 0.5 * rho * rho * u * u
    beta = rho * u
    denom = 1.0 - 2.0 * beta * nu * np.sqrt(lam) - 2.0 * alpha * nu * nu * lam
    if denom.size and np.min(np.abs(denom)) < 1e-12:
        raise SingularMatrixError(
            "a per-mode denominator vanishes; the transform is singular here"
        )
    exponent = (alpha + 0.5 * beta * beta) * np.sum(coeffs * coeffs / denom)
    root_product = 1.0 + 0.0j
    for d in np.atleast_1d(denom):
        root_product *= principal_sqrt(complex(d))
    return complex(cmath.exp(complex(exponent)) / root_product)


def symmetric_operator_transform(
    lambdas: Sequence[float],
    g_coeffs: Sequence[float],
    nu: float,
    rho: float,
    u: complex,
    w: complex,
    n_grid: int = 400,
) -> complex:
    """Same transform as the spectral product, via the operator determinant.

    Realises the finite-rank symmetric kernel concretely in the cosine basis
    on [0, 1] (mode ``j`` uses ``sqrt(2) cos((j+1) pi t)``), discretised on a
    midpoint grid where that basis is exactly orthogonal, and evaluates

        exp( a h g^T A^{-1} g - 1/2 log det A ),
        A = (I - b h K)(I - b h K) - 2 a h Sigma,

    with ``a = w + (u^2 - u)/2`` and ``b = rho nu u``. The kernel factors are
    not unit-determinant here (the kernel is symmetric, not causal), so their
    determinants genuinely contribute — this is the sandwiched form of the
    determinant, against which the spectral product is tested.

    Parameters
    ----------
    lambdas, g_coeffs, nu, rho, u, w
        As in :func:`symmetric_spectral_transform`.
    n_grid : int, optional
        Number of midpoint cells (default 400).

    Returns
    -------
    complex
        The transform value.
    """
    lam, coeffs, u, w = _symmetric_inputs(lambdas, g_coeffs, nu, rho, u, w)
    if not isinstance(n_grid, (int, np.integer)) or n_grid < 16:
        raise ConfigurationError(f"n_grid must be an integer >= 16, got {n_grid!r}")
    n_grid = int(n_grid)
    if lam.size >= n_grid // 4:
        raise ConfigurationError(
            "n_grid is too small to resolve the requested number of modes"
        )
    h = 1.0 / n_grid
    times = (np.arange(n_grid) + 0.5) * h
    basis = math.sqrt(2.0) * np.cos(
        np.outer(times, np.pi * (np.arange(lam.size) + 1.0))
    )
    kernel_mat = basis @ np.diag(np.sqrt(lam)) @ basis.T
    sigma_mat = (nu * nu) * (basis @ np.diag(lam) @ basis.T)
    g_vec = basis @ coeffs

    a = w + 0.5 * (u * u - u)
    b = rho * nu * u
    eye = np.eye(n_grid)
    shift = eye - (b * h) * kernel_mat
    big_a = shift @ shift - (2.0 * a * h) * sigma_mat
    lu, piv = _factor(big_a)
    logabs, phase = _logdet_from_factor(lu, piv)
    sol = lu_solve((lu, piv), g_vec.astype(big_a.dtype))
    quad = a * h * (g_vec @ sol)
    return complex(cmath.exp(quad - 0.5 * (logabs + 1j * phase)))
