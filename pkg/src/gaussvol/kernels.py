"""Volterra kernels, input curves and model discretisation.

A model couples a log-price diffusion to a Gaussian volatility process

    X_t = g0(t) + integral_0^t K(t, s) * kappa * X_s ds
              + integral_0^t K(t, s) * nu dW_s,

where ``K`` is a Volterra kernel and ``g0`` a deterministic input curve. This
module defines the kernel and curve variants, the model configuration, and
builders for the discretised objects on the uniform left-endpoint grid
``t_i = i * horizon / n``:

* ``K_mat``      -- strictly lower-triangular cell averages of ``K``,
* ``Sigma_mat``  -- point values of the forward covariance
  ``Sigma_0(s, u) = nu^2 * integral_0^(s^u) K(s, z) K(u, z) dz``,
* ``g_vec``      -- curve values at the left endpoints.

Closed forms are used wherever the integrals are elementary (constant,
fractional and bridge kernels; piecewise-linear tabulated kernels integrate
exactly segment by segment). Unit tests cross-check every closed form against
adaptive quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigurationError, DomainError
from .specfun import _gamma_positive, _hyp2f1_grid

__all__ = [
    "ConstantKernel",
    "RiemannLiouvilleKernel",
    "BrownianBridgeKernel",
    "TabulatedConvolutionKernel",
    "KernelSpec",
    "FractionalAffineCurve",
    "AffineCurve",
    "TabulatedCurve",
    "InputCurveSpec",
    "ModelConfig",
    "DiscretizedModel",
    "kernel_eval",
    "build_K_matrix",
    "sigma0_point",
    "build_Sigma0_matrix",
    "build_Sigma_t_matrix",
    "build_g_vector",
    "discretize",
]


def _readonly(arr: NDArray) -> NDArray:
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# Kernel variants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantKernel:
    """Kernel ``K(t, s) = 1`` for ``s < t`` (standard Brownian volatility)."""


@dataclass(frozen=True)
class RiemannLiouvilleKernel:
    """Fractional kernel ``K(t, s) = (t - s)^(hurst - 1/2) / Gamma(hurst + 1/2)``.

    Parameters
    ----------
    hurst : float
        Roughness index in (0, 1); values below 1/2 give a singular
        (rough) kernel, 1/2 recovers the constant kernel.
    """

    hurst: float

    def __post_init__(self) -> None:
        if not (isinstance(self.hurst, (int, float)) and math.isfinite(self.hurst)):
            raise ConfigurationError(f"hurst must be a finite real, got {self.hurst!r}")
        if not (0.0 < self.hurst < 1.0):
            raise ConfigurationError(f"hurst must lie in (0, 1), got {self.hurst!r}")

    @property
    def alpha(self) -> float:
        """Shifted exponent ``hurst + 1/2`` (the power of the cell primitive)."""
        return self.hurst + 0.5


@dataclass(frozen=True)
class BrownianBridgeKernel:
    """Kernel ``K(t, s) = (t1 - t) / (t1 - s)`` for ``s < t``.

    The induced Gaussian process is a bridge pinned at time ``t1``, which
    must lie strictly beyond the model horizon. This kernel is not of
    convolution type.
    """

    t1: float

    def __post_init__(self) -> None:
        if not (isinstance(self.t1, (int, float)) and math.isfinite(self.t1) and self.t1 > 0):
            raise ConfigurationError(f"t1 must be a finite positive real, got {self.t1!r}")


@dataclass(frozen=True)
class TabulatedConvolutionKernel:
    """Convolution kernel ``K(t, s) = k(t - s)`` from tabulated samples.

    ``k`` is the piecewise-linear interpolant of ``values`` on the strictly
    increasing knot vector ``tau`` (which must start at 0). Cell averages and
    covariance integrals are computed exactly for the interpolant.

    Parameters
    ----------
    tau : sequence of float
        Knot locations, ``tau[0] == 0``, strictly increasing.
    values : sequence of float
        Kernel samples ``k(tau[i])``, all finite.
    """

    tau: NDArray[np.float64]
    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        tau = np.asarray(self.tau, dtype=float)
        values = np.asarray(self.values, dtype=float)
        problems = []
        if tau.ndim != 1 or values.ndim != 1 or tau.size != values.size:
            problems.append("tau and values must be one-dimensional and equally long")
        elif tau.size < 2:
            problems.append("at least two knots are required")
        else:
            if tau[0] != 0.0:
                problems.append(f"tau must start at 0, got tau[0] = {tau[0]!r}")
            if not np.all(np.diff(tau) > 0):
                problems.append("tau must be strictly increasing")
        if not (np.all(np.isfinite(tau)) and np.all(np.isfinite(values))):
            problems.append("tau and values must be finite")
        if problems:
            raise ConfigurationError("\n".join(problems))
        object.__setattr__(self, "tau", _readonly(tau))
        object.__setattr__(self, "values", _readonly(values))


KernelSpec = Union[
    ConstantKernel,
    RiemannLiouvilleKernel,
    BrownianBridgeKernel,
    TabulatedConvolutionKernel,
]


# ---------------------------------------------------------------------------
# Input curve variants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FractionalAffineCurve:
    """Curve ``g0(t) = x0 + theta * t^alpha / Gamma(1 + alpha)``.

    The exponent ``alpha`` is inherited from a fractional kernel, so this
    curve is only valid together with :class:`RiemannLiouvilleKernel`; it is
    the fractional analogue of an affine mean level.
    """

    x0: float
    theta: float

    def __post_init__(self) -> None:
        _require_finite("x0", self.x0)
        _require_finite("theta", self.theta)


@dataclass(frozen=True)
class AffineCurve:
    """Curve ``g0(t) = x0 + theta * t``."""

    x0: float
    theta: float

    def __post_init__(self) -> None:
        _require_finite("x0", self.x0)
        _require_finite("theta", self.theta)


@dataclass(frozen=True)
class TabulatedCurve:
    """Curve given by its values at the left endpoints of the time grid.

    The number of values must equal the discretisation size ``n`` of the
    grid it is used with.
    """

    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise ConfigurationError("curve values must form a non-empty vector")
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("curve values must be finite")
        object.__setattr__(self, "values", _readonly(values))


InputCurveSpec = Union[FractionalAffineCurve, AffineCurve, TabulatedCurve]


def _require_finite(name: str, value: float) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value)):
        raise ConfigurationError(f"{name} must be a finite real, got {value!r}")


# ---------------------------------------------------------------------------
# Model configuration and discretisation container
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelConfig:
    """Complete description of a Gaussian volatility model.

    Parameters
    ----------
    s0 : float
        Initial spot, positive.
    kernel : KernelSpec
        Volterra kernel of the volatility process.
    curve : InputCurveSpec
        Deterministic input curve ``g0``.
    kappa : float
        Linear drift loading (0 for a driftless volatility process).
    nu : float
        Volatility-of-volatility, non-negative.
    rho : float
        Spot/volatility correlation in [-1, 1].
    horizon : float
        Largest maturity the model will be discretised to, positive.
    """

    s0: float
    kernel: KernelSpec
    curve: InputCurveSpec
    kappa: float
    nu: float
    rho: float
    horizon: float

    def __post_init__(self) -> None:
        problems = []
        for name in ("s0", "kappa", "nu", "rho", "horizon"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                problems.append(f"{name} must be a finite real, got {value!r}")
        if not problems:
            if self.s0 <= 0:
                problems.append(f"s0 must be positive, got {self.s0!r}")
            if self.nu < 0:
                problems.append(f"nu must be non-negative, got {self.nu!r}")
            if not (-1.0 <= self.rho <= 1.0):
                problems.append(f"rho must lie in [-1, 1], got {self.rho!r}")
            if self.horizon <= 0:
                problems.append(f"horizon must be positive, got {self.horizon!r}")
            if isinstance(self.kernel, BrownianBridgeKernel) and self.kernel.t1 <= self.horizon:
                problems.append(
                    f"bridge pin time t1 = {self.kernel.t1!r} must exceed the "
                    f"horizon {self.horizon!r}"
                )
            if (
                isinstance(self.kernel, TabulatedConvolutionKernel)
                and self.kernel.tau[-1] < self.horizon
            ):
                problems.append(
                    "tabulated kernel knots must cover [0, horizon]; last knot "
                    f"{self.kernel.tau[-1]!r} < horizon {self.horizon!r}"
                )
            if isinstance(self.curve, FractionalAffineCurve) and not isinstance(
                self.kernel, RiemannLiouvilleKernel
            ):
                problems.append(
                    "a fractional-affine curve requires the fractional kernel "
                    "(its exponent comes from the kernel roughness)"
                )
        if problems:
            raise ConfigurationError("\n".join(problems))


@dataclass(frozen=True)
class DiscretizedModel:
    """Discretised model objects on the uniform grid ``t_i = i * horizon / n``.

    Attributes
    ----------
    n : int
        Number of grid cells (at least 2).
    grid : numpy.ndarray
        The ``n + 1`` grid points ``t_0 .. t_n``.
    K_mat : numpy.ndarray
        Strictly lower-triangular ``n x n`` matrix of kernel cell integrals
        ``K_mat[r, c] = integral_{t_c}^{t_{c+1}} K(t_r, s) ds`` for ``c < r``.
    Sigma_mat : numpy.ndarray
        Symmetric PSD ``n x n`` matrix of covariance point values
        ``Sigma_mat[r, c] = Sigma_0(t_r, t_c)`` (first row and column zero).
    g_vec : numpy.ndarray
        Input curve at the left endpoints, length ``n``.
    horizon : float
        Grid horizon ``t_n``.

    All arrays are read-only; the container is safe to share.
    """

    n: int
    grid: NDArray[np.float64]
    K_mat: NDArray[np.float64]
    Sigma_mat: NDArray[np.float64]
    g_vec: NDArray[np.float64]
    horizon: float

    @property
    def step(self) -> float:
        """Grid mesh ``horizon / n``."""
        return self.horizon / self.n


# ---------------------------------------------------------------------------
# Pointwise kernel evaluation
# ---------------------------------------------------------------------------


def kernel_eval(kernel: KernelSpec, t: float, s: float) -> float:
    """Evaluate the kernel ``K(t, s)``; zero whenever ``s >= t``.

    Parameters
    ----------
    kernel : KernelSpec
        Kernel variant.
    t, s : float
        Evaluation time and integration time, both non-negative.

    Returns
    -------
    float
        ``K(t, s)``.

    Raises
    ------
    DomainError
        For ``s == t`` with a singular fractional kernel (hurst < 1/2),
        for bridge arguments at or beyond the pin time, or for tabulated
        lags beyond the last knot.
    """
    t = float(t)
    s = float(s)
    if not (math.isfinite(t) and math.isfinite(s) and t >= 0.0 and s >= 0.0):
        raise DomainError(f"kernel_eval requires finite t, s >= 0, got t={t!r}, s={s!r}")
    if isinstance(kernel, RiemannLiouvilleKernel) and s == t and kernel.hurst < 0.5:
        raise DomainError(
            "the fractional kernel diverges on the diagonal for hurst < 1/2"
        )
    if s >= t:
        return 0.0
    if isinstance(kernel, ConstantKernel):
        return 1.0
    if isinstance(kernel, RiemannLiouvilleKernel):
        return (t - s) ** (kernel.hurst - 0.5) / _gamma_positive(kernel.alpha)
    if isinstance(kernel, BrownianBridgeKernel):
        if t >= kernel.t1 or s >= kernel.t1:
            raise DomainError("bridge kernel arguments must lie before the pin time t1")
        return (kernel.t1 - t) / (kernel.t1 - s)
    if isinstance(kernel, TabulatedConvolutionKernel):
        lag = t - s
        if lag > kernel.tau[-1]:
            raise DomainError(
                f"tabulated kernel lag {lag!r} exceeds the last knot {kernel.tau[-1]!r}"
            )
        return float(np.interp(lag, kernel.tau, kernel.values))
    raise ConfigurationError(f"unknown kernel variant {type(kernel).__name__}")


# ---------------------------------------------------------------------------
# K matrix
# ---------------------------------------------------------------------------


def _validate_grid_args(n: int, horizon: float) -> None:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise ConfigurationError(f"n must be an integer, got {n!r}")
    if n < 2:
        raise ConfigurationError(f"n must be at least 2, got {n!r}")
    if not (isinstance(horizon, (int, float)) and math.isfinite(horizon) and horizon > 0):
        raise ConfigurationError(f"horizon must be a finite positive real, got {horizon!r}")


def build_K_matrix(kernel: KernelSpec, n: int, horizon: float) -> NDArray[np.float64]:
    """Strictly lower-triangular matrix of kernel cell integrals.

    Entry ``(r, c)`` for ``c < r`` is ``integral_{t_c}^{t_{c+1}} K(t_r, s) ds``
    on the uniform grid; all other entries are exactly zero. Every variant
    uses the exact primitive of its kernel.

    Parameters
    ----------
    kernel : KernelSpec
        Kernel variant.
    n : int
        Number of grid cells, at least 2.
    horizon : float
        Grid horizon.

    Returns
    -------
    numpy.ndarray
        Read-only ``n x n`` matrix.
    """
    _validate_grid_args(n, horizon)
    step = horizon / n
    times = step * np.arange(n)
    lower = np.tril(np.ones((n, n), dtype=bool), k=-1)

    if isinstance(kernel, ConstantKernel):
        out = np.where(lower, step, 0.0)
    elif isinstance(kernel, RiemannLiouvilleKernel):
        alpha = kernel.alpha
        d_left = times[:, None] - times[None, :]
        d_right = d_left - step
        p_left = np.where(lower, np.where(lower, d_left, 1.0) ** alpha, 0.0)
        p_right = np.where(lower, np.maximum(d_right, 0.0) ** alpha, 0.0)
        out = (p_left - p_right) / _gamma_positive(1.0 + alpha)
    elif isinstance(kernel, BrownianBridgeKernel):
        t1 = kernel.t1
        if t1 <= times[-1]:
            raise DomainError("bridge pin time t1 must exceed the last grid point")
        den = t1 - times[None, :] - step
        ratio = np.log((t1 - times[None, :]) / np.where(den > 0.0, den, 1.0))
        out = np.where(lower, (t1 - times[:, None]) * ratio, 0.0)
    elif isinstance(kernel, TabulatedConvolutionKernel):
        if times[-1] > kernel.tau[-1]:
            raise DomainError(
                "tabulated kernel knots must cover the grid span "
                f"[0, {times[-1]!r}]"
            )
        lag_left = np.maximum(times[:, None] - times[None, :], 0.0)
        lag_right = np.maximum(lag_left - step, 0.0)
        prim = _tabulated_primitive(kernel)
        out = np.where(lower, prim(lag_left) - prim(lag_right), 0.0)
    else:
        raise ConfigurationError(f"unknown kernel variant {type(kernel).__name__}")
    return _readonly(out)


def _tabulated_primitive(kernel: TabulatedConvolutionKernel):
    """Exact primitive ``F(x) = integral_0^x k`` of the piecewise-linear kernel."""
    tau = kernel.tau
    vals = kernel.values
    seg = np.diff(tau)
    knot_area = np.concatenate(
        ([0.0], np.cumsum(0.5 * (vals[:-1] + vals[1:]) * seg))
    )
    slopes = np.diff(vals) / seg

    def primitive(x: NDArray[np.float64]) -> NDArray[np.float64]:
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(tau, x, side="right") - 1, 0, tau.size - 2)
        dx = x - tau[idx]
        return knot_area[idx] + vals[idx] * dx + 0.5 * slopes[idx] * dx * dx

    return primitive


# ---------------------------------------------------------------------------
# Forward covariance
# ---------------------------------------------------------------------------


def sigma0_point(kernel: KernelSpec, nu: float, s: float, u: float) -> float:
    """Forward covariance ``Sigma_0(s, u) = nu^2 * integral_0^(s^u) K(s,z) K(u,z) dz``.

    Closed forms: ``nu^2 * min(s, u)`` for the constant kernel, the
    hypergeometric expression for the fractional kernel (with the analytic
    ``s^(2*hurst)`` diagonal branch), a rational primitive for the bridge,
    and exact piecewise integration for tabulated kernels.

    Parameters
    ----------
    kernel : KernelSpec
        Kernel variant.
    nu : float
        Volatility-of-volatility, non-negative.
    s, u : float
        Coordinates, non-negative.

    Returns
    -------
    float
        The covariance value (0 whenever ``min(s, u) == 0``).
    """
    s = float(s)
    u = float(u)
    nu = float(nu)
    if not (math.isfinite(s) and math.isfinite(u) and s >= 0.0 and u >= 0.0):
        raise DomainError(f"sigma0_point requires finite s, u >= 0, got s={s!r}, u={u!r}")
    if not (math.isfinite(nu) and nu >= 0.0):
        raise DomainError(f"nu must be a finite non-negative real, got {nu!r}")

    if isinstance(kernel, ConstantKernel):
        return nu * nu * min(s, u)
    if isinstance(kernel, RiemannLiouvilleKernel):
        arr = _rl_sigma0_values(kernel.alpha, nu, np.array([s]), np.array([u]))
        return float(arr[0])
    if isinstance(kernel, BrownianBridgeKernel):
        t1 = kernel.t1
        if s >= t1 or u >= t1:
            raise DomainError("bridge kernel arguments must lie before the pin time t1")
        low = min(s, u)
        if low <= 0.0:
            return 0.0
        return nu * nu * (t1 - s) * (t1 - u) * (1.0 / (t1 - low) - 1.0 / t1)
    if isinstance(kernel, TabulatedConvolutionKernel):
        if max(s, u) > kernel.tau[-1]:
            raise DomainError("tabulated kernel knots must cover [0, max(s, u)]")
        return _tabulated_sigma0(kernel, nu, s, u)
    raise ConfigurationError(f"unknown kernel variant {type(kernel).__name__}")


def _rl_sigma0_values(
    alpha: float,
    nu: float,
    s: NDArray[np.float64],
    u: NDArray[np.float64],
) -> NDArray[np.float64]:
    """Element-wise fractional-kernel ``Sigma_0`` on coordinate arrays.

    Uses ``Sigma_0(s, u) = nu^2 / (Gamma(a) Gamma(1+a)) * m^a * M^(a-1)
    * 2F1(1, 1-a; 1+a; m/M)`` with ``m = min``, ``M = max`` off the diagonal,
    and the analytic diagonal branch ``nu^2 * m^(2a-1) / ((2a-1) Gamma(a)^2)``
    when the coordinate ratio is within 1e-12 of 1.
    """
    s = np.asarray(s, dtype=float)
    u = np.asarray(u, dtype=float)
    m = np.minimum(s, u)
    big = np.maximum(s, u)
    out = np.zeros(np.broadcast(s, u).shape, dtype=float)
    pos = m > 0.0
    if not pos.any():
        return out
    ratio = np.zeros_like(out)
    ratio[pos] = m[pos] / big[pos]
    near_diag = pos & (ratio > 1.0 - 1e-12)
    off_diag = pos & ~near_diag
    g_a = _gamma_positive(alpha)
    if off_diag.any():
        hyp = _hyp2f1_grid(alpha, ratio[off_diag])
        g_a1 = _gamma_positive(1.0 + alpha)
        out[off_diag] = (
            (nu * nu / (g_a * g_a1))
            * m[off_diag] ** alpha
            * big[off_diag] ** (alpha - 1.0)
            * hyp
        )
    if near_diag.any():
        two_h = 2.0 * alpha - 1.0
        out[near_diag] = nu * nu * m[near_diag] ** two_h / (two_h * g_a * g_a)
    return out


def _tabulated_sigma0(
    kernel: TabulatedConvolutionKernel, nu: float, s: float, u: float
) -> float:
    """Exact ``Sigma_0`` for a piecewise-linear convolution kernel.

    The integrand ``k(s - z) k(u - z)`` is piecewise quadratic in ``z``
    between the images of the knots; per-segment Simpson is exact there.
    """
    low = min(s, u)
    if low <= 0.0:
        return 0.0
    cuts = np.concatenate((s - kernel.tau, u - kernel.tau, [0.0, low]))
    cuts = np.unique(np.clip(cuts, 0.0, low))
    mid = 0.5 * (cuts[:-1] + cuts[1:])
    width = np.diff(cuts)

    def k_of(z: NDArray[np.float64], upper: float) -> NDArray[np.float64]:
        return np.interp(upper - z, kernel.tau, kernel.values)

    f_left = k_of(cuts[:-1], s) * k_of(cuts[:-1], u)
    f_mid = k_of(mid, s) * k_of(mid, u)
    f_right = k_of(cuts[1:], s) * k_of(cuts[1:], u)
    integral = float(np.sum(width * (f_left + 4.0 * f_mid + f_right) / 6.0))
    return nu * nu * integral


def build_Sigma0_matrix(
    kernel: KernelSpec, n: int, horizon: float, nu: float
) -> NDArray[np.float64]:
    """Matrix of forward covariance point values on the left-endpoint grid.

    Entry ``(r, c)`` is ``Sigma_0(t_r, t_c)``; the first row and column are
    exactly zero because ``t_0 = 0``.

    Parameters
    ----------
    kernel : KernelSpec
        Kernel variant.
    n : int
        Number of grid cells, at least 2.
    horizon : float
        Grid horizon.
    nu : float
        Volatility-of-volatility.

    Returns
    -------
    numpy.ndarray
        Read-only symmetric PSD ``n x n`` matrix.
    """
    _validate_grid_args(n, horizon)
    return _sigma_matrix_at(kernel, n, horizon, nu, t=0.0)


def build_Sigma_t_matrix(
    kernel: KernelSpec, n: int, horizon: float, nu: float, t: float
) -> NDArray[np.float64]:
    """Matrix of deflated covariance values ``Sigma_t(t_r, t_c)``.

    ``Sigma_t(s, u) = nu^2 * integral_t^(s^u) K(s, z) K(u, z) dz`` vanishes
    unless both coordinates exceed ``t``; at ``t = 0`` it coincides with
    ``Sigma_0`` and at ``t = horizon`` it is identically zero. For
    convolution kernels the shift identity
    ``Sigma_t(s, u) = Sigma_0(s - t, u - t)`` is exact and used directly;
    the bridge kernel has an elementary primitive with the same structure.

    Parameters
    ----------
    kernel : KernelSpec
        Kernel variant.
    n : int
        Number of grid cells, at least 2.
    horizon : float
        Grid horizon.
    nu : float
        Volatility-of-volatility.
    t : float
        Deflation time in [0, horizon].

    Returns
    -------
    numpy.ndarray
        Read-only symmetric PSD ``n x n`` matrix.
    """
    _validate_grid_args(n, horizon)
    t = float(t)
    if not (math.isfinite(t) and 0.0 <= t <= horizon):
        raise DomainError(f"t must lie in [0, horizon], got {t!r}")
    return _sigma_matrix_at(kernel, n, horizon, nu, t)


def _sigma_matrix_at(
    kernel: KernelSpec, n: int, horizon: float, nu: float, t: float
) -> NDArray[np.float64]:
    if not (isinstance(nu, (int, float)) and math.isfinite(nu) and nu >= 0.0):
        raise DomainError(f"nu must be a finite non-negative real, got {nu!r}")
    step = horizon / n
    times = step * np.arange(n)

    if isinstance(kernel, ConstantKernel):
        shifted = np.maximum(times - t, 0.0)
        out = nu * nu * np.minimum(shifted[:, None], shifted[None, :])
    elif isinstance(kernel, RiemannLiouvilleKernel):
        shifted = np.maximum(times - t, 0.0)
        s_mat, u_mat = np.broadcast_arrays(shifted[:, None], shifted[None, :])
        out = _rl_sigma0_values(kernel.alpha, nu, s_mat, u_mat)
    elif isinstance(kernel, BrownianBridgeKernel):
        t1 = kernel.t1
        if times[-1] >= t1:
            raise DomainError("bridge pin time t1 must exceed the last grid point")
        low = np.minimum(times[:, None], times[None, :])
        depth = np.where(low > t, 1.0 / (t1 - low) - 1.0 / (t1 - t), 0.0)
        out = nu * nu * (t1 - times[:, None]) * (t1 - times[None, :]) * depth
    elif isinstance(kernel, TabulatedConvolutionKernel):
        if times[-1] > kernel.tau[-1]:
            raise DomainError(
                "tabulated kernel knots must cover the grid span "
                f"[0, {times[-1]!r}]"
            )
        out = np.zeros((n, n))
        shifted = times - t
        for r in range(n):
            if shifted[r] <= 0.0:
                continue
            for c in range(r + 1):
                if shifted[c] <= 0.0:
                    continue
                val = _tabulated_sigma0(kernel, nu, shifted[r], shifted[c])
                out[r, c] = val
                out[c, r] = val
    else:
        raise ConfigurationError(f"unknown kernel variant {type(kernel).__name__}")
    return _readonly(out)


# ---------------------------------------------------------------------------
# Input curve vector and discretisation
# ---------------------------------------------------------------------------


def build_g_vector(
    curve: InputCurveSpec, kernel: KernelSpec, n: int, horizon: float
) -> NDArray[np.float64]:
    """Input curve values ``g0(t_r)`` at the left endpoints of the grid.

    Parameters
    ----------
    curve : InputCurveSpec
        Curve variant; a fractional-affine curve requires a fractional
        kernel (its exponent is the kernel's).
    kernel : KernelSpec
        Kernel the curve is paired with.
    n : int
        Number of grid cells, at least 2.
    horizon : float
        Grid horizon.

    Returns
    -------
    numpy.ndarray
        Read-only length-``n`` vector.
    """
    _validate_grid_args(n, horizon)
    step = horizon / n
    times = step * np.arange(n)
    if isinstance(curve, FractionalAffineCurve):
        if not isinstance(kernel, RiemannLiouvilleKernel):
            raise ConfigurationError(
                "a fractional-affine curve requires the fractional kernel"
            )
        alpha = kernel.alpha
        out = curve.x0 + curve.theta * times**alpha / _gamma_positive(1.0 + alpha)
    elif isinstance(curve, AffineCurve):
        out = curve.x0 + curve.theta * times
    elif isinstance(curve, TabulatedCurve):
        if curve.values.size != n:
            raise ConfigurationError(
                f"tabulated curve has {curve.values.size} values but the grid "
                f"needs {n}"
            )
        out = curve.values
    else:
        raise ConfigurationError(f"unknown curve variant {type(curve).__name__}")
    return _readonly(out)


def discretize(model: ModelConfig, n: int) -> DiscretizedModel:
    """Build all discretised objects of ``model`` on an ``n``-cell grid.

    Parameters
    ----------
    model : ModelConfig
        Validated model configuration.
    n : int
        Number of grid cells, at least 2.

    Returns
    -------
    DiscretizedModel
        Grid, kernel matrix, covariance matrix and curve vector.
    """
    _validate_grid_args(n, model.horizon)
    grid = np.linspace(0.0, model.horizon, n + 1)
    return DiscretizedModel(
        n=int(n),
        grid=_readonly(grid),
        K_mat=build_K_matrix(model.kernel, n, model.horizon),
        Sigma_mat=build_Sigma0_matrix(model.kernel, n, model.horizon, model.nu),
        g_vec=build_g_vector(model.curve, model.kernel, n, model.horizon),
        horizon=float(model.horizon),
    )
