"""Discretised resolvent operators and log-transform assembly.

The joint Fourier-Laplace transform of (log-spot, integrated variance) in a
Gaussian volatility model is an explicit functional of two operators built
from the kernel matrix ``K`` and covariance matrix ``Sigma``:

* ``sigma_tilde = (I - b K)^{-1} Sigma (I - b K^T)^{-1}``,
* ``psi = a (I - b K^T)^{-1} (I - 2 a (T/n) sigma_tilde)^{-1} (I - b K)^{-1}``,

with scalar coefficients ``a = w + (u^2 - u)/2`` and ``b = kappa + rho nu u``.
The log-transform needs only the quadratic form ``(T/n) g^T psi g`` and the
log-determinant of the middle factor. Because ``I - b K`` is unit triangular
(determinant exactly one), both reduce to a single LU factorisation of the
congruent matrix

    A = (I - b K)(I - b K)^T - 2 a (T/n) Sigma,

which this module exploits; :func:`build_psi_matrix` keeps the literal
factor-by-factor product so the two routes can be tested against each other.

Determinants along transform curves are accumulated in log form from LU
pivots (magnitude and principal phase separately), never as raw products, so
they cannot overflow at large grid sizes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import lu_factor, lu_solve, solve_triangular

from .errors import (
    AdmissibilityWarning,
    ConfigurationError,
    DomainError,
    NumericalError,
    SingularMatrixError,
)
from .kernels import (
    BrownianBridgeKernel,
    ConstantKernel,
    DiscretizedModel,
    KernelSpec,
    ModelConfig,
    RiemannLiouvilleKernel,
    TabulatedConvolutionKernel,
    _tabulated_primitive,
    build_Sigma_t_matrix,
    discretize,
    kernel_eval,
)
from .specfun import _gamma_positive, _wrap_angle

__all__ = [
    "RiccatiCoefficients",
    "lu_det_and_solve",
    "build_sigma_tilde",
    "build_psi_matrix",
    "quadratic_form",
    "transform_log_value",
    "phi_exponent_via_trace",
]

_PIVOT_FLOOR = 1e-14


@dataclass(frozen=True)
class RiccatiCoefficients:
    """Scalar coefficients of the quadratic transform functional.

    Attributes
    ----------
    a : complex
        Source coefficient ``w + (u^2 - u) / 2``.
    b : complex
        Shift coefficient ``kappa + rho * nu * u``.
    domain_ok : bool
        True when the well-posedness condition
        ``Re(a) <= -Im(b)^2 / (2 nu^2)`` holds (for ``nu = 0`` the condition
        degenerates to ``Re(a) <= 0``). Evaluation outside this region emits
        :class:`~gaussvol.errors.AdmissibilityWarning`.
    """

    a: complex
    b: complex
    domain_ok: bool

    @classmethod
    def from_query(
        cls, u: complex, w: complex, kappa: float, nu: float, rho: float
    ) -> "RiccatiCoefficients":
        """Build coefficients from a transform query and model parameters."""
        u = complex(u)
        w = complex(w)
        a = w + 0.5 * (u * u - u)
        b = complex(kappa) + rho * nu * u
        tol = 1e-12
        if nu > 0.0:
            ok = a.real <= -(b.imag * b.imag) / (2.0 * nu * nu) + tol
        else:
            ok = a.real <= tol
        return cls(a=a, b=b, domain_ok=bool(ok))


# ---------------------------------------------------------------------------
# LU plumbing
# ---------------------------------------------------------------------------


def _factor(matrix: NDArray) -> Tuple[NDArray, NDArray]:
    """LU-factor ``matrix`` and enforce the pivot-size singularity check."""
    norm = np.linalg.norm(matrix, 1)
    with warnings.catch_warnings():
        # scipy warns on exactly-zero pivots; the typed error below covers it.
        warnings.simplefilter("ignore")
        lu, piv = lu_factor(matrix, check_finite=True)
    pivots = np.abs(np.diagonal(lu))
    if norm == 0.0 or pivots.min() < _PIVOT_FLOOR * norm:
        raise SingularMatrixError(
            f"matrix is singular to working precision (smallest pivot "
            f"{pivots.min():.3e} against scale {norm:.3e})"
        )
    return lu, piv


def _logdet_from_factor(lu: NDArray, piv: NDArray) -> Tuple[float, float]:
    """Log-magnitude and principal phase of the determinant from LU pivots."""
    diag = np.diagonal(lu)
    logabs = float(np.sum(np.log(np.abs(diag))))
    swaps = int(np.count_nonzero(piv != np.arange(piv.size)))
    if np.iscomplexobj(diag):
        phase = float(np.sum(np.angle(diag))) + math.pi * swaps
    else:
        phase = math.pi * (int(np.count_nonzero(diag < 0)) + swaps)
    return logabs, _wrap_angle(phase)


def lu_det_and_solve(
    matrix: NDArray, rhs: Optional[NDArray] = None
) -> Tuple[complex, Optional[NDArray]]:
    """Determinant (and optional solve) of a square matrix via pivoted LU.

    Parameters
    ----------
    matrix : numpy.ndarray
        Square real or complex matrix with finite entries.
    rhs : numpy.ndarray, optional
        Right-hand side vector or matrix to solve against.

    Returns
    -------
    tuple
        ``(det, solution)`` where ``solution`` is None when ``rhs`` is; the
        determinant is the pivot product with the permutation sign.

    Raises
    ------
    SingularMatrixError
        If the smallest pivot magnitude falls below ``1e-14`` times the
        1-norm of the matrix.
    """
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigurationError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.real)) or (
        np.iscomplexobj(m) and not np.all(np.isfinite(m.imag))
    ):
        raise DomainError("matrix entries must be finite")
    lu, piv = _factor(m)
    diag = np.diagonal(lu)
    swaps = int(np.count_nonzero(piv != np.arange(piv.size)))
    det = (-1.0) ** swaps * np.prod(diag)
    sol = None
    if rhs is not None:
        rhs_arr = np.asarray(rhs)
        sol = lu_solve((lu, piv), rhs_arr)
    return complex(det), sol


# ---------------------------------------------------------------------------
# Operator builders
# ---------------------------------------------------------------------------


def _shift_factor(disc: DiscretizedModel, b: complex) -> NDArray:
    """The unit lower-triangular factor ``I - b K``."""
    if b.imag == 0.0:
        out = np.eye(disc.n) - b.real * disc.K_mat
    else:
        out = np.eye(disc.n, dtype=complex) - b * disc.K_mat
    return out


def build_sigma_tilde(disc: DiscretizedModel, b: complex) -> NDArray:
    """Resolvent-deflated covariance ``(I - b K)^{-1} Sigma (I - b K^T)^{-1}``.

    Parameters
    ----------
    disc : DiscretizedModel
        Discretised model (supplies ``K_mat`` and ``Sigma_mat``).
    b : complex
        Shift coefficient; ``b = 0`` returns ``Sigma_mat`` itself.

    Returns
    -------
    numpy.ndarray
        The sandwiched matrix (complex when ``b`` is).
    """
    b = complex(b)
    if b == 0:
        return disc.Sigma_mat.copy()
    ell = _shift_factor(disc, b)
    half = solve_triangular(
        ell, disc.Sigma_mat.astype(ell.dtype), lower=True, unit_diagonal=True
    )
    return solve_triangular(ell, half.T, lower=True, unit_diagonal=True).T


def build_psi_matrix(disc: DiscretizedModel, coeff: RiccatiCoefficients) -> NDArray:
    """The resolvent operator matrix of the quadratic transform functional.

    Implements the literal product
    ``a (I - b K^T)^{-1} (I - 2 a (T/n) sigma_tilde)^{-1} (I - b K)^{-1}``.

    Parameters
    ----------
    disc : DiscretizedModel
        Discretised model.
    coeff : RiccatiCoefficients
        Scalar coefficients; ``a = 0`` returns the zero matrix. Evaluation
        with ``domain_ok`` false emits :class:`AdmissibilityWarning`.

    Returns
    -------
    numpy.ndarray
        ``n x n`` matrix, symmetric to discretisation accuracy; real,
        symmetric and negative semidefinite for real ``a <= 0``, real ``b``.
    """
    a = complex(coeff.a)
    b = complex(coeff.b)
    n = disc.n
    if a == 0:
        dtype = float if (a.imag == 0.0 and b.imag == 0.0) else complex
        return np.zeros((n, n), dtype=dtype)
    if not coeff.domain_ok:
        warnings.warn(
            "transform coefficients lie outside the proven well-posedness "
            "region; the result carries no guarantee",
            AdmissibilityWarning,
            stacklevel=2,
        )
    delta = disc.step
    sigma_tilde = build_sigma_tilde(disc, b)
    if a.imag != 0.0 and not np.iscomplexobj(sigma_tilde):
        sigma_tilde = sigma_tilde.astype(complex)
    middle = np.eye(n, dtype=sigma_tilde.dtype) - (2.0 * _scalar(a) * delta) * sigma_tilde
    lu, piv = _factor(middle)
    ell = _shift_factor(disc, b)
    inv_ell = solve_triangular(
        ell, np.eye(n, dtype=ell.dtype), lower=True, unit_diagonal=True
    )
    core = lu_solve((lu, piv), inv_ell)
    psi = _scalar(a) * solve_triangular(
        ell.T, core, lower=False, unit_diagonal=True
    )
    return psi


def _scalar(z: complex):
    """Return ``z`` as a plain float when it is real (keeps real dtypes real)."""
    return z.real if z.imag == 0.0 else z


def quadratic_form(
    g: NDArray[np.float64], psi: NDArray, horizon: float, n: int
) -> complex:
    """Discretised quadratic functional ``(horizon / n) * g^T psi g``.

    Parameters
    ----------
    g : numpy.ndarray
        Curve vector of length ``n``.
    psi : numpy.ndarray
        Operator matrix, ``n x n``.
    horizon : float
        Grid horizon.
    n : int
        Number of grid cells.

    Returns
    -------
    complex
        The weighted quadratic form (real input gives a real-valued complex).
    """
    g = np.asarray(g)
    psi = np.asarray(psi)
    if g.ndim != 1 or psi.shape != (g.size, g.size):
        raise ConfigurationError(
            f"shape mismatch: g has {g.shape}, psi has {psi.shape}"
        )
    if n != g.size:
        raise ConfigurationError(f"n = {n} does not match g of length {g.size}")
    return complex((horizon / n) * (g @ psi @ g))


# ---------------------------------------------------------------------------
# Log-transform assembly
# ---------------------------------------------------------------------------


def _assemble_congruent(
    disc: DiscretizedModel,
    a: complex,
    b: complex,
    delta: float,
    kkt: Optional[NDArray[np.float64]] = None,
) -> NDArray:
    """Assemble ``A = (I - bK)(I - bK)^T - 2 a delta Sigma`` in O(n^2).

    ``kkt`` caches the real product ``K @ K.T`` across evaluations that share
    a discretisation (one transform curve reuses it for every grid point).
    """
    k_mat = disc.K_mat
    if kkt is None:
        kkt = k_mat @ k_mat.T
    complex_path = a.imag != 0.0 or b.imag != 0.0
    a_s = a if complex_path else a.real
    b_s = b if complex_path else b.real
    out = (-b_s) * (k_mat + k_mat.T)
    out += (b_s * b_s) * kkt
    out -= (2.0 * a_s * delta) * disc.Sigma_mat
    idx = np.arange(disc.n)
    out[idx, idx] += 1.0
    return out


def transform_log_value(
    disc: DiscretizedModel,
    coeff: RiccatiCoefficients,
    horizon: Optional[float] = None,
) -> Tuple[complex, complex]:
    """Quadratic form and principal log-determinant of one transform point.

    Returns the pair ``(quad, logdet_raw)`` with
    ``quad = (T/n) g^T psi g`` and ``logdet_raw`` the log-determinant of the
    middle factor ``I - 2 a (T/n) sigma_tilde``, its imaginary part being the
    principal phase in (-pi, pi]. The triangular shift factors contribute
    exactly zero to the log-determinant and are absorbed into one congruent
    matrix, so a single LU factorisation serves both outputs.

    Parameters
    ----------
    disc : DiscretizedModel
        Discretised model.
    coeff : RiccatiCoefficients
        Scalar coefficients; ``a = 0`` returns ``(0, 0)`` exactly.
    horizon : float, optional
        Must match the discretisation horizon when given (the signature
        carries it for symmetry with the curve-level callers).

    Returns
    -------
    tuple of complex
        ``(quad, logdet_raw)``.
    """
    if horizon is not None and not math.isclose(
        horizon, disc.horizon, rel_tol=1e-12, abs_tol=0.0
    ):
        raise ConfigurationError(
            f"horizon {horizon!r} does not match the discretisation horizon "
            f"{disc.horizon!r}"
        )
    quad, logabs, phase = _transform_parts(disc, coeff, kkt=None)
    return quad, complex(logabs, phase)


def _transform_parts(
    disc: DiscretizedModel,
    coeff: RiccatiCoefficients,
    kkt: Optional[NDArray[np.float64]],
) -> Tuple[complex, float, float]:
    """Internal: ``(quad, logabs(det), principal phase(det))`` for one point."""
    a = complex(coeff.a)
    b = complex(coeff.b)
    if a == 0:
        return 0j, 0.0, 0.0
    if not coeff.domain_ok:
        warnings.warn(
            "transform coefficients lie outside the proven well-posedness "
            "region; the result carries no guarantee",
            AdmissibilityWarning,
            stacklevel=3,
        )
    delta = disc.step
    big_a = _assemble_congruent(disc, a, b, delta, kkt)
    lu, piv = _factor(big_a)
    logabs, phase = _logdet_from_factor(lu, piv)
    g = disc.g_vec.astype(big_a.dtype)
    sol = lu_solve((lu, piv), g)
    quad = complex(_scalar(a) * delta * (g @ sol))
    return quad, logabs, phase


# ---------------------------------------------------------------------------
# Clipped kernel matrices and the trace cross-check
# ---------------------------------------------------------------------------


def _build_K_matrix_clipped(
    kernel: KernelSpec, n: int, horizon: float, t: float
) -> NDArray[np.float64]:
    """Cell integrals of the kernel restricted to integration times >= t.

    Entry ``(r, c)`` for ``c < r`` is
    ``integral_{max(t_c, t)}^{t_{c+1}} K(t_r, s) ds`` (zero when the cell
    lies entirely below ``t``). ``t = 0`` recovers the plain kernel matrix.
    """
    step = horizon / n
    times = step * np.arange(n)
    lower = np.tril(np.ones((n, n), dtype=bool), k=-1)
    lo = np.maximum(times[None, :], t)
    hi = times[None, :] + step
    live = lower & (hi > lo)

    if isinstance(kernel, ConstantKernel):
        out = np.where(live, hi - lo, 0.0)
    elif isinstance(kernel, RiemannLiouvilleKernel):
        alpha = kernel.alpha
        d_lo = np.where(live, np.maximum(times[:, None] - lo, 0.0), 0.0)
        d_hi = np.where(live, np.maximum(times[:, None] - hi, 0.0), 0.0)
        out = (d_lo**alpha - d_hi**alpha) / _gamma_positive(1.0 + alpha)
    elif isinstance(kernel, BrownianBridgeKernel):
        t1 = kernel.t1
        if t1 <= times[-1]:
            raise DomainError("bridge pin time t1 must exceed the last grid point")
        num = t1 - lo
        den = t1 - hi
        ratio = np.log(
            np.where(live, num, 1.0) / np.where(live & (den > 0.0), den, 1.0)
        )
        out = np.where(live, (t1 - times[:, None]) * ratio, 0.0)
    elif isinstance(kernel, TabulatedConvolutionKernel):
        if times[-1] > kernel.tau[-1]:
            raise DomainError("tabulated kernel knots must cover the grid span")
        prim = _tabulated_primitive(kernel)
        lag_lo = np.maximum(times[:, None] - lo, 0.0)
        lag_hi = np.maximum(times[:, None] - hi, 0.0)
        out = np.where(live, prim(lag_lo) - prim(lag_hi), 0.0)
    else:
        raise ConfigurationError(f"unknown kernel variant {type(kernel).__name__}")
    return out


def phi_exponent_via_trace(
    model: ModelConfig, n: int, m: int, coeff: RiccatiCoefficients
) -> float:
    """Drift exponent of the transform via the trace integral.

    Cross-checks ``-1/2 log det`` through the independent representation

        phi_0 = - integral_0^T Tr(psi_t sigma_dot_t) dt,

    where ``sigma_dot_t`` has the rank-one kernel ``-nu^2 K(s, t) K(v, t)``
    and ``psi_t`` is built from the covariance and kernel matrices clipped
    below ``t``. The time integral uses the composite midpoint rule with
    ``m`` nodes ``t_k = (k - 1/2) T / m`` (off the discretisation grid, so
    singular kernels are never evaluated on their diagonal).

    Parameters
    ----------
    model : ModelConfig
        Model configuration.
    n : int
        Discretisation size for the operator matrices, at least 2.
    m : int
        Number of midpoint time nodes, at least 10.
    coeff : RiccatiCoefficients
        Coefficients with real ``a`` and real ``b`` (imaginary parts raise).

    Returns
    -------
    float
        Midpoint-rule approximation of the drift exponent; agreement with
        ``-1/2 log det`` improves as ``m`` grows.

    Raises
    ------
    NumericalError
        If a midpoint node coincides with a grid time at which the kernel
        is singular (fractional kernel with ``hurst < 1/2``); choose ``m``
        and ``n`` so the node set stays off the grid.
    """
    if not isinstance(m, (int, np.integer)) or isinstance(m, bool) or m < 10:
        raise ConfigurationError(f"m must be an integer >= 10, got {m!r}")
    a = complex(coeff.a)
    b = complex(coeff.b)
    if a.imag != 0.0 or b.imag != 0.0:
        raise DomainError(
            "phi_exponent_via_trace requires real coefficients (u with real "
            "a, real w)"
        )
    a_r = a.real
    b_r = b.real
    if a_r == 0.0:
        return 0.0
    kernel = model.kernel
    if (
        isinstance(kernel, RiemannLiouvilleKernel)
        and kernel.hurst < 0.5
        and any((n * (2 * k + 1)) % (2 * m) == 0 for k in range(m))
    ):
        raise NumericalError(
            "a midpoint time node falls on a grid time where the fractional "
            "kernel is singular; shift the nodes off the grid by choosing m "
            "(or n) so that n*(2k+1) is never divisible by 2m"
        )
    horizon = model.horizon
    delta = horizon / n
    step_times = delta * np.arange(n)
    total = 0.0
    eye = np.eye(n)
    for k in range(m):
        t_node = (k + 0.5) * horizon / m
        sig_t = build_Sigma_t_matrix(model.kernel, n, horizon, model.nu, t_node)
        if b_r != 0.0:
            k_t = _build_K_matrix_clipped(model.kernel, n, horizon, t_node)
            ell = eye - b_r * k_t
            big_a = ell @ ell.T - (2.0 * a_r * delta) * sig_t
        else:
            big_a = eye - (2.0 * a_r * delta) * sig_t
        kappa_vec = np.array(
            [kernel_eval(model.kernel, float(tr), t_node) for tr in step_times]
        )
        lu, piv = _factor(big_a)
        sol = lu_solve((lu, piv), kappa_vec)
        total += float(kappa_vec @ sol)
    nu2 = model.nu * model.nu
    return (horizon / m) * nu2 * delta * a_r * total
