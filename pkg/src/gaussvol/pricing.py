"""European call pricing from the transform via the cosine expansion.

The density of ``x = ln(S_T / K)`` is expanded in cosines on a truncation
interval sized from the first two cumulants of the log-price, which are in
turn read off the computed transform by central finite differences. One
frequency curve per maturity prices every strike on the ladder; implied
volatilities come from bisection against the (undiscounted, zero-rate)
Black-Scholes formula. On top of the pricers sit the smile, the at-the-money
skew by central differencing of the smile, and a least-squares power-law fit
of the skew term structure.

The module is deliberately drift-free: zero interest rate and dividends,
strikes and prices in spot units.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from .charfn import _curve_core, _markovian_curve
from .errors import (
    BoundsError,
    ConfigurationError,
    DegenerateFitError,
    NumericalError,
)
from .kernels import ModelConfig, discretize

__all__ = [
    "SmilePoint",
    "SkewPoint",
    "bs_call_price",
    "implied_vol",
    "cos_call_price",
    "smile",
    "atm_skew",
    "fit_power_law",
]

# Step for the central finite differences that read the cumulants of the
# log-price off the transform at z = 0.
_FD_STEP = 1e-4
# Bisection bracket for implied volatility and the price tolerance at which
# the bisection stops.
_VOL_BRACKET = (1e-4, 5.0)
_PRICE_TOL = 1e-12
# Modulus of the transform at the largest retained frequency above which the
# truncated tail is considered non-negligible.
_TAIL_TOL = 1e-8


@dataclass(frozen=True)
class SmilePoint:
    """One implied-volatility observation.

    Attributes
    ----------
    k : float
        Log-moneyness ``ln(K / S0)``.
    maturity : float
        Maturity in years, positive.
    iv : float
        Implied volatility, inside the open interval (0, 5).
    """

    k: float
    maturity: float
    iv: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.k)):
            raise ConfigurationError(f"log-moneyness must be finite, got {self.k!r}")
        if not (math.isfinite(self.maturity) and self.maturity > 0):
            raise ConfigurationError(
                f"maturity must be positive, got {self.maturity!r}"
            )
        if not (math.isfinite(self.iv) and 0.0 < self.iv < 5.0):
            raise ConfigurationError(
                f"implied volatility must lie in (0, 5), got {self.iv!r}"
            )


@dataclass(frozen=True)
class SkewPoint:
    """At-the-money implied-volatility skew at one maturity.

    Attributes
    ----------
    maturity : float
        Maturity in years, positive.
    skew : float
        Derivative of implied volatility with respect to log-moneyness at
        the money.
    """

    maturity: float
    skew: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.maturity) and self.maturity > 0):
            raise ConfigurationError(
                f"maturity must be positive, got {self.maturity!r}"
            )
        if not math.isfinite(self.skew):
            raise ConfigurationError(f"skew must be finite, got {self.skew!r}")


def _norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def bs_call_price(s0: float, strike: float, maturity: float, sigma: float) -> float:
    """Undiscounted Black-Scholes call value (zero rates and dividends).

    Parameters
    ----------
    s0, strike, maturity, sigma : float
        Spot, strike, maturity in years and volatility, all positive.

    Returns
    -------
    float
        ``s0 N(d1) - strike N(d2)``.
    """
    for name, val in (("s0", s0), ("strike", strike), ("maturity", maturity), ("sigma", sigma)):
        if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
            raise ConfigurationError(f"{name} must be positive and finite, got {val!r}")
    srt = sigma * math.sqrt(maturity)
    d1 = math.log(s0 / strike) / srt + 0.5 * srt
    d2 = d1 - srt
    return s0 * _norm_cdf(d1) - strike * _norm_cdf(d2)


def implied_vol(price: float, s0: float, strike: float, maturity: float) -> float:
    """Implied volatility by bisection on ``sigma`` in [1e-4, 5].

    The bisection stops when the Black-Scholes value matches ``price`` to
    1e-12 (or the bracket is exhausted), so the round trip through
    :func:`bs_call_price` reproduces the input price to 1e-10.

    Prices inside the no-arbitrage band but below the sigma = 1e-4
    Black-Scholes value (time value under the bracket floor) return the
    bracket floor; prices above the sigma = 5 value raise
    :class:`~gaussvol.errors.BoundsError`, as do prices outside the
    no-arbitrage band ``(max(s0 - strike, 0), s0)``.

    Parameters
    ----------
    price : float
        Observed call price in spot units.
    s0, strike, maturity : float
        Spot, strike and maturity, all positive.

    Returns
    -------
    float
        The implied volatility.

    Raises
    ------
    BoundsError
        If ``price`` violates the no-arbitrage bounds or exceeds the
        bisection bracket.
    """
    for name, val in (("s0", s0), ("strike", strike), ("maturity", maturity)):
        if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
            raise ConfigurationError(f"{name} must be positive and finite, got {val!r}")
    if not (isinstance(price, (int, float)) and math.isfinite(price)):
        raise ConfigurationError(f"price must be finite, got {price!r}")
    lower = max(s0 - strike, 0.0)
    if not lower < price < s0:
        raise BoundsError(
            f"price {price!r} violates the no-arbitrage bounds "
            f"({lower!r}, {s0!r}) for a call at strike {strike!r}"
        )
    lo, hi = _VOL_BRACKET
    if bs_call_price(s0, strike, maturity, lo) >= price:
        return lo
    if bs_call_price(s0, strike, maturity, hi) <= price:
        raise BoundsError(
            f"price {price!r} exceeds the Black-Scholes value at the "
            f"volatility bracket ceiling {hi!r}"
        )
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        diff = bs_call_price(s0, strike, maturity, mid) - price
        if abs(diff) <= _PRICE_TOL:
            return mid
        if diff < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Cosine-expansion pricing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _MaturityCurve:
    """Transform values on a shared frequency grid for one maturity.

    The grid is ``z_j = j pi / width`` where ``width`` is the truncation
    interval length ``2 L sqrt(c2)``; ``c1_raw`` is the first cumulant of the
    log-price (spot included), so the interval for strike ``K`` is centred at
    ``c1_raw - ln K``.
    """

    width: float
    c1_raw: float
    psi: NDArray[np.complex128]

    def tail_mass(self, n_terms: int) -> float:
        return float(abs(self.psi[n_terms - 1]))

    def call_price(self, strike: float, n_terms: Optional[int] = None) -> float:
        psi = self.psi if n_terms is None else self.psi[:n_terms]
        return _call_price_from_curve(psi, self.width, self.c1_raw, strike)


def _cumulants_from_point(psi_h: complex, step: float) -> tuple:
    """First two cumulants of the log-price from one transform value.

    By Hermitian symmetry the central differences of the log-transform along
    the imaginary axis collapse onto the single point ``u = i step``:
    ``c1 = Im ln psi / step`` and ``c2 = -2 Re ln psi / step^2``.
    """
    log_psi = cmath.log(psi_h)
    c1 = log_psi.imag / step
    c2 = -2.0 * log_psi.real / (step * step)
    if not (math.isfinite(c2) and c2 > 0.0):
        raise NumericalError(
            f"second cumulant of the log-price is not positive ({c2!r}); "
            "the truncation interval cannot be sized"
        )
    return c1, c2


def _call_price_from_curve(
    psi: NDArray[np.complex128], width: float, c1_raw: float, strike: float
) -> float:
    """Cosine-expansion call price from transform values on one grid.

    ``psi[j]`` must hold the transform of the log-price at frequency
    ``j pi / width`` (spot included). The truncation interval for the
    log-moneyness variable is ``[c1_raw - ln K - width/2, ... + width/2]``;
    the payoff coefficients integrate ``K (e^x - 1)`` cosine-weighted over
    the positive part of that interval.
    """
    n_terms = psi.size
    log_k = math.log(strike)
    a = (c1_raw - log_k) - 0.5 * width
    b = a + width
    lo = max(a, 0.0)
    if b <= lo:
        return 0.0
    freq = np.arange(n_terms) * (math.pi / width)
    arg_hi = freq * (b - a)
    arg_lo = freq * (lo - a)
    chi = (
        np.cos(arg_hi) * math.exp(b)
        - np.cos(arg_lo) * math.exp(lo)
        + freq * (np.sin(arg_hi) * math.exp(b) - np.sin(arg_lo) * math.exp(lo))
    ) / (1.0 + freq * freq)
    phi = np.empty_like(chi)
    phi[0] = b - lo
    phi[1:] = (np.sin(arg_hi[1:]) - np.sin(arg_lo[1:])) / freq[1:]
    payoff_coeffs = (2.0 / width) * strike * (chi - phi)
    damped = np.real(psi * np.exp(-1j * freq * (log_k + a)))
    total = float(np.dot(damped, payoff_coeffs)) - 0.5 * damped[0] * payoff_coeffs[0]
    return total


def _validate_cos_args(strike, maturity, n_cos, big_l) -> None:
    if not (isinstance(strike, (int, float)) and math.isfinite(strike) and strike > 0):
        raise ConfigurationError(f"strike must be positive, got {strike!r}")
    if not (isinstance(maturity, (int, float)) and math.isfinite(maturity) and maturity > 0):
        raise ConfigurationError(f"maturity must be positive, got {maturity!r}")
    if not isinstance(n_cos, (int, np.integer)) or n_cos < 16:
        raise ConfigurationError(f"n_cos must be an integer >= 16, got {n_cos!r}")
    if not (isinstance(big_l, (int, float)) and math.isfinite(big_l) and big_l >= 6.0):
        raise ConfigurationError(f"L must be at least 6, got {big_l!r}")


def _model_curve(
    model: ModelConfig, n: int, maturity: float, n_points: int, big_l: float
) -> _MaturityCurve:
    """Build the shared frequency curve for one maturity of a model."""
    pricing_model = replace(model, horizon=float(maturity))
    disc = discretize(pricing_model, n)
    log_s0 = math.log(pricing_model.s0)
    probe = _curve_core(
        disc,
        pricing_model.kappa,
        pricing_model.nu,
        pricing_model.rho,
        log_s0,
        np.array([0.0, _FD_STEP]),
        0.0,
    )
    c1_raw, c2 = _cumulants_from_point(probe[1], _FD_STEP)
    width = 2.0 * big_l * math.sqrt(c2)
    z_grid = np.arange(n_points) * (math.pi / width)
    psi = _curve_core(
        disc,
        pricing_model.kappa,
        pricing_model.nu,
        pricing_model.rho,
        log_s0,
        z_grid,
        0.0,
    )
    return _MaturityCurve(width=width, c1_raw=c1_raw, psi=psi)


def _markovian_price_curve(
    s0: float,
    x0: float,
    theta: float,
    kappa: float,
    nu: float,
    rho: float,
    maturity: float,
    n_points: int,
    big_l: float,
) -> _MaturityCurve:
    """Frequency curve driven by the Riccati-ODE transform (oracle plumbing).

    Shares the cosine assembly with :func:`_model_curve` but computes its own
    cumulants and transform values from the backward-ODE route, so comparing
    the two pricers isolates the transform difference.
    """
    probe = _markovian_curve(
        s0, x0, theta, kappa, nu, rho, maturity, np.array([0.0, _FD_STEP])
    )
    c1_raw, c2 = _cumulants_from_point(probe[1], _FD_STEP)
    width = 2.0 * big_l * math.sqrt(c2)
    z_grid = np.arange(n_points) * (math.pi / width)
    psi = _markovian_curve(s0, x0, theta, kappa, nu, rho, maturity, z_grid)
    return _MaturityCurve(width=width, c1_raw=c1_raw, psi=psi)


def _warn_tail_mass(curve: _MaturityCurve, n_terms: int) -> float:
    tail = curve.tail_mass(n_terms)
    if tail > _TAIL_TOL:
        warnings.warn(
            f"transform modulus {tail:.3e} at the largest retained frequency "
            f"exceeds {_TAIL_TOL:.0e}; increase n_cos or L",
            UserWarning,
            stacklevel=3,
        )
    return tail


def cos_call_price(
    model: ModelConfig,
    n: int,
    strike: float,
    maturity: float,
    n_cos: int = 256,
    L: float = 12.0,
    return_diagnostics: bool = False,
):
    """European call price by the cosine expansion of the transform.

    The truncation interval is ``[c1 - L sqrt(c2), c1 + L sqrt(c2)]`` in the
    log-moneyness variable, with the cumulants read off the transform by
    central finite differences of step 1e-4 at frequency zero. The frequency
    grid is evaluated once at twice the requested term count, so the
    doubling gap ``|price(2 n_cos) - price(n_cos)|`` is always available as
    a convergence diagnostic.

    Parameters
    ----------
    model : ModelConfig
        Model parameters; the horizon field is replaced by ``maturity``.
    n : int
        Operator discretisation size.
    strike : float
        Strike, positive, in spot units.
    maturity : float
        Maturity in years, positive.
    n_cos : int, optional
        Number of cosine terms, at least 16 (default 256).
    L : float, optional
        Truncation width in standard deviations, at least 6 (default 12).
    return_diagnostics : bool, optional
        When true, return ``(price, diagnostics)`` where the diagnostics
        dictionary reports the doubling gap, the tail mass at the largest
        retained frequency and the truncation interval.

    Returns
    -------
    float or (float, dict)
        The price, optionally with diagnostics.

    Raises
    ------
    PhaseUnwrapError
        Propagated from branch tracking when the frequency grid is too
        coarse.

    Warns
    -----
    UserWarning
        If the transform modulus at the largest retained frequency exceeds
        1e-8 (truncated tail mass not negligible).
    """
    _validate_cos_args(strike, maturity, n_cos, L)
    curve = _model_curve(model, n, float(maturity), 2 * int(n_cos), float(L))
    price = curve.call_price(strike, int(n_cos))
    price_doubled = curve.call_price(strike)
    tail = _warn_tail_mass(curve, int(n_cos))
    if not return_diagnostics:
        return price
    log_k = math.log(strike)
    half = 0.5 * curve.width
    diagnostics = {
        "doubling_gap": abs(price_doubled - price),
        "tail_mass": tail,
        "interval": (curve.c1_raw - log_k - half, curve.c1_raw - log_k + half),
        "z_max": (n_cos - 1) * math.pi / curve.width,
    }
    return price, diagnostics


def smile(
    model: ModelConfig,
    n: int,
    strikes: Sequence[float],
    maturity: float,
    n_cos: int = 256,
    L: float = 12.0,
) -> list:
    """Implied-volatility smile across a strike ladder at one maturity.

    One frequency curve is evaluated and shared by every strike. Strikes
    whose price falls outside the no-arbitrage band (or beyond the implied
    volatility bracket) are reported through a warning and skipped; the
    remaining points are returned.

    Parameters
    ----------
    model : ModelConfig
        Model parameters; the horizon field is replaced by ``maturity``.
    n : int
        Operator discretisation size.
    strikes : sequence of float
        Positive strikes.
    maturity : float
        Maturity in years, positive.
    n_cos, L : optional
        Cosine-expansion controls as in :func:`cos_call_price`.

    Returns
    -------
    list of SmilePoint
        One point per surviving strike, in input order.
    """
    strikes = [float(k) for k in strikes]
    if not strikes:
        raise ConfigurationError("strikes must be a non-empty sequence")
    for strike in strikes:
        _validate_cos_args(strike, maturity, n_cos, L)
    curve = _model_curve(model, n, float(maturity), int(n_cos), float(L))
    _warn_tail_mass(curve, int(n_cos))
    points = []
    for strike in strikes:
        price = curve.call_price(strike)
        try:
            vol = implied_vol(price, model.s0, strike, maturity)
        except BoundsError as exc:
            warnings.warn(
                f"strike {strike!r} skipped: {exc}", UserWarning, stacklevel=2
            )
            continue
        points.append(
            SmilePoint(k=math.log(strike / model.s0), maturity=float(maturity), iv=vol)
        )
    return points


def atm_skew(
    model: ModelConfig,
    n: int,
    maturity: float,
    h: float = 5e-3,
    n_cos: int = 256,
    L: float = 12.0,
) -> SkewPoint:
    """At-the-money implied-volatility skew by central differencing.

    Prices the two strikes ``S0 exp(+-h)`` off one shared frequency curve
    and returns ``(iv(+h) - iv(-h)) / (2 h)``.

    Parameters
    ----------
    model : ModelConfig
        Model parameters; the horizon field is replaced by ``maturity``.
    n : int
        Operator discretisation size.
    maturity : float
        Maturity in years, positive.
    h : float, optional
        Log-moneyness step, in ``(1e-4, 0.05]``; default 5e-3.
    n_cos, L : optional
        Cosine-expansion controls as in :func:`cos_call_price`.

    Returns
    -------
    SkewPoint
        Maturity and central-difference skew.

    Raises
    ------
    BoundsError
        Propagated if either probe price leaves the no-arbitrage band.
    """
    if not (isinstance(h, (int, float)) and 1e-4 < h <= 0.05):
        raise ConfigurationError(
            f"log-moneyness step must lie in (1e-4, 0.05], got {h!r}"
        )
    _validate_cos_args(model.s0, maturity, n_cos, L)
    curve = _model_curve(model, n, float(maturity), int(n_cos), float(L))
    _warn_tail_mass(curve, int(n_cos))
    vols = []
    for sign in (1.0, -1.0):
        strike = model.s0 * math.exp(sign * h)
        price = curve.call_price(strike)
        vols.append(implied_vol(price, model.s0, strike, maturity))
    return SkewPoint(maturity=float(maturity), skew=(vols[0] - vols[1]) / (2.0 * h))


def fit_power_law(points: Sequence) -> tuple:
    """Least-squares power law ``|skew| ~ c T^p`` through skew observations.

    Fits a straight line to ``(ln T, ln |skew|)``.

    Parameters
    ----------
    points : sequence
        At least three :class:`SkewPoint` instances (or ``(maturity, skew)``
        pairs) with positive maturities and non-zero skews.

    Returns
    -------
    (float, float)
        The prefactor ``c`` and the exponent ``p``.

    Raises
    ------
    DegenerateFitError
        If the maturities are not pairwise distinct.
    """
    pairs = []
    for point in points:
        if isinstance(point, SkewPoint):
            pairs.append((point.maturity, point.skew))
        else:
            try:
                t_val, s_val = point
                pairs.append((float(t_val), float(s_val)))
            except (TypeError, ValueError) as exc:
                raise ConfigurationError(
                    f"cannot interpret {point!r} as a skew observation"
                ) from exc
    if len(pairs) < 3:
        raise ConfigurationError(
            f"need at least 3 skew points for a power-law fit, got {len(pairs)}"
        )
    maturities = np.array([p[0] for p in pairs])
    skews = np.array([p[1] for p in pairs])
    if not (np.all(np.isfinite(maturities)) and np.all(maturities > 0)):
        raise ConfigurationError("maturities must be positive and finite")
    if not (np.all(np.isfinite(skews)) and np.all(skews != 0.0)):
        raise ConfigurationError("skews must be finite and non-zero")
    if np.unique(maturities).size != maturities.size:
        raise DegenerateFitError(
            "maturities must be pairwise distinct for a power-law fit"
        )
    slope, intercept = np.polyfit(np.log(maturities), np.log(np.abs(skews)), 1)
    return float(math.exp(intercept)), float(slope)
