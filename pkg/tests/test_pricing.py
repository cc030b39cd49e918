"""Tests for the pricing layer.

Oracles:

* hand-evaluated normal-CDF expression for the Black-Scholes frozen value;
* round-trip properties for the implied-volatility bisection;
* the deterministic-volatility degenerate model, which must price exactly as
  Black-Scholes;
* a cosine pricer driven by the Riccati-ODE transform (independent transform
  route, shared payoff assembly);
* exact log-linear data for the power-law fit.
"""

import math

import numpy as np
import pytest

from gaussvol.charfn import joint_transform
from gaussvol.errors import (
    BoundsError,
    ConfigurationError,
    DegenerateFitError,
)
from gaussvol.kernels import (
    AffineCurve,
    ConstantKernel,
    ModelConfig,
    RiemannLiouvilleKernel,
)
from gaussvol.pricing import (
    SkewPoint,
    SmilePoint,
    _markovian_price_curve,
    atm_skew,
    bs_call_price,
    cos_call_price,
    fit_power_law,
    implied_vol,
    smile,
)

# 2 N(0.1) - 1 evaluated through the error function (mpmath, 50 digits).
BS_ATM_FROZEN = 0.079655674554057963

REF_PARAMS = dict(x0=0.1, theta=0.1, kappa=0.0, nu=0.25, rho=-0.7)


def make_model(
    s0=1.0, kernel=None, x0=0.1, theta=0.1, kappa=0.0, nu=0.25, rho=-0.7, horizon=1.0
):
    return ModelConfig(
        s0=s0,
        kernel=kernel if kernel is not None else ConstantKernel(),
        curve=AffineCurve(x0=x0, theta=theta),
        kappa=kappa,
        nu=nu,
        rho=rho,
        horizon=horizon,
    )


def deterministic_model(sigma=0.2, s0=1.0):
    return make_model(s0=s0, x0=sigma, theta=0.0, nu=0.0, rho=0.0)


def oracle_smile_points(s0, strikes, maturity, n_cos, big_l, **params):
    """Implied vols from the ODE-transform-driven cosine pricer."""
    curve = _markovian_price_curve(
        s0,
        params["x0"],
        params["theta"],
        params["kappa"],
        params["nu"],
        params["rho"],
        maturity,
        n_cos,
        big_l,
    )
    return [
        implied_vol(curve.call_price(strike), s0, strike, maturity)
        for strike in strikes
    ]


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


class TestDomainTypes:
    def test_smile_point_accepts_valid(self):
        point = SmilePoint(k=-0.1, maturity=0.5, iv=0.25)
        assert point.iv == 0.25

    @pytest.mark.parametrize("iv", [0.0, -0.3, 5.0, 7.2, math.nan])
    def test_smile_point_rejects_bad_vol(self, iv):
        with pytest.raises(ConfigurationError):
            SmilePoint(k=0.0, maturity=1.0, iv=iv)

    def test_smile_point_rejects_bad_maturity(self):
        with pytest.raises(ConfigurationError):
            SmilePoint(k=0.0, maturity=-1.0, iv=0.2)

    def test_skew_point_requires_finite(self):
        with pytest.raises(ConfigurationError):
            SkewPoint(maturity=1.0, skew=math.inf)
        with pytest.raises(ConfigurationError):
            SkewPoint(maturity=0.0, skew=-0.3)


# ---------------------------------------------------------------------------
# Black-Scholes utilities
# ---------------------------------------------------------------------------


class TestBsCallPrice:
    def test_frozen_atm_value(self):
        assert bs_call_price(1.0, 1.0, 1.0, 0.2) == pytest.approx(
            BS_ATM_FROZEN, rel=1e-14
        )

    def test_vanishing_vol_gives_intrinsic(self):
        assert bs_call_price(1.5, 1.0, 1.0, 1e-12) == pytest.approx(0.5, abs=1e-12)

    def test_vanishing_strike_gives_spot(self):
        assert bs_call_price(1.5, 1e-12, 1.0, 0.2) == pytest.approx(1.5, rel=1e-12)

    def test_rejects_nonpositive_inputs(self):
        with pytest.raises(ConfigurationError):
            bs_call_price(-1.0, 1.0, 1.0, 0.2)
        with pytest.raises(ConfigurationError):
            bs_call_price(1.0, 1.0, 0.0, 0.2)


class TestImpliedVol:
    def test_round_trip_frozen(self):
        assert implied_vol(BS_ATM_FROZEN, 1.0, 1.0, 1.0) == pytest.approx(
            0.2, abs=1e-9
        )

    @pytest.mark.parametrize(
        "sigma, strike, maturity",
        [(0.31, 0.7, 0.25), (1.8, 1.4, 2.0), (0.05, 1.05, 0.5)],
    )
    def test_random_round_trips(self, sigma, strike, maturity):
        price = bs_call_price(1.0, strike, maturity, sigma)
        vol = implied_vol(price, 1.0, strike, maturity)
        assert vol == pytest.approx(sigma, abs=1e-9)
        assert bs_call_price(1.0, strike, maturity, vol) == pytest.approx(
            price, abs=1e-10
        )

    def test_price_below_lower_bound(self):
        with pytest.raises(BoundsError):
            implied_vol(0.49, 1.5, 1.0, 1.0)

    def test_price_above_spot(self):
        with pytest.raises(BoundsError):
            implied_vol(1.01, 1.0, 1.0, 1.0)

    def test_price_above_bracket_ceiling(self):
        # 0.999 S0 is arbitrage-free but above the sigma = 5 value.
        with pytest.raises(BoundsError):
            implied_vol(0.999, 1.0, 1.0, 1.0)

    def test_tiny_time_value_returns_floor(self):
        floor_price = bs_call_price(1.0, 1.0, 1.0, 1e-4)
        assert implied_vol(0.5 * floor_price, 1.0, 1.0, 1.0) == 1e-4


# ---------------------------------------------------------------------------
# Cosine pricer
# ---------------------------------------------------------------------------


class TestCosCallPrice:
    @pytest.mark.parametrize("moneyness", [0.8, 0.9, 1.0, 1.1, 1.2])
    def test_deterministic_vol_matches_black_scholes(self, moneyness):
        model = deterministic_model(sigma=0.2, s0=100.0)
        strike = moneyness * 100.0
        price = cos_call_price(model, 64, strike, 1.0)
        reference = bs_call_price(100.0, strike, 1.0, 0.2)
        assert price == pytest.approx(reference, rel=1e-6)

    def test_matches_ode_driven_cos_at_half_hurst(self):
        # The left-endpoint operator scheme converges first order in n, so
        # matching the continuous-limit ODE transform at 1e-4 relative needs
        # a fine grid. A small term count keeps the runtime manageable: the
        # (heavy) truncation bias cancels exactly because both routes share
        # the cosine assembly, leaving only the transform difference.
        # Slowest test in the suite (about two minutes).
        model = make_model()
        with pytest.warns(UserWarning, match="largest retained frequency"):
            price = cos_call_price(model, 4096, 1.0, 1.0, n_cos=16, L=7.0)
        oracle_curve = _markovian_price_curve(
            1.0, 0.1, 0.1, 0.0, 0.25, -0.7, 1.0, 32, 7.0
        )
        oracle_price = oracle_curve.call_price(1.0, 16)
        assert price == pytest.approx(oracle_price, rel=1e-4)

    def test_doubling_gap_small_at_default_width(self):
        model = make_model(kernel=RiemannLiouvilleKernel(hurst=0.2))
        price, diag = cos_call_price(
            model, 128, 1.05, 1.0, return_diagnostics=True
        )
        assert diag["doubling_gap"] < 1e-6 * model.s0
        assert diag["tail_mass"] <= 1e-8
        assert diag["interval"][0] < 0.0 < diag["interval"][1]
        assert price > 0.0

    def test_prices_decrease_in_strike(self):
        model = make_model(kernel=RiemannLiouvilleKernel(hurst=0.2))
        strikes = np.exp(np.linspace(-0.4, 0.4, 9))
        prices = [cos_call_price(model, 128, k, 1.0, n_cos=128) for k in strikes]
        assert np.all(np.diff(prices) < 0.0)

    def test_coarse_grid_warns_on_tail_mass(self):
        model = make_model()
        with pytest.warns(UserWarning, match="largest retained frequency"):
            cos_call_price(model, 32, 1.0, 1.0, n_cos=16, L=6.0)

    def test_transform_at_one_reconstructs_spot(self):
        # Zero-strike limit of the COS machinery: E[S_T] from the transform.
        for kernel in (ConstantKernel(), RiemannLiouvilleKernel(hurst=0.2)):
            model = make_model(s0=1.3, kernel=kernel)
            value = joint_transform(model, 512, (1.0, 0.0)).value
            assert abs(value - 1.3) <= 1e-6

    def test_validation(self):
        model = make_model()
        with pytest.raises(ConfigurationError):
            cos_call_price(model, 32, -1.0, 1.0)
        with pytest.raises(ConfigurationError):
            cos_call_price(model, 32, 1.0, 0.0)
        with pytest.raises(ConfigurationError):
            cos_call_price(model, 32, 1.0, 1.0, n_cos=8)
        with pytest.raises(ConfigurationError):
            cos_call_price(model, 32, 1.0, 1.0, L=4.0)


# ---------------------------------------------------------------------------
# Smile
# ---------------------------------------------------------------------------


class TestSmile:
    def test_deterministic_model_flat_smile(self):
        model = deterministic_model(sigma=0.2)
        strikes = np.exp(np.linspace(-0.3, 0.3, 7))
        points = smile(model, 64, strikes, 1.0)
        assert len(points) == 7
        for point in points:
            assert point.iv == pytest.approx(0.2, abs=1e-5)

    def test_matches_ode_oracle_smile(self):
        # n_cos = 128 leaves visible tail mass at this maturity, so the
        # diagnostic fires; the truncation is shared by both routes.
        model = make_model()
        log_moneyness = np.linspace(-0.3, 0.3, 7)
        strikes = np.exp(log_moneyness)
        with pytest.warns(UserWarning, match="largest retained frequency"):
            points = smile(model, 512, strikes, 1.0, n_cos=128)
        oracle = oracle_smile_points(1.0, strikes, 1.0, 128, 12.0, **REF_PARAMS)
        assert len(points) == 7
        for point, reference in zip(points, oracle):
            assert point.iv == pytest.approx(reference, abs=1e-2)

    def test_refining_n_reduces_smile_error(self):
        model = make_model()
        strikes = np.exp(np.linspace(-0.2, 0.2, 5))
        oracle = oracle_smile_points(1.0, strikes, 1.0, 128, 12.0, **REF_PARAMS)
        errors = {}
        with pytest.warns(UserWarning, match="largest retained frequency"):
            for n in (128, 512):
                points = smile(model, n, strikes, 1.0, n_cos=128)
                errors[n] = max(
                    abs(point.iv - ref) for point, ref in zip(points, oracle)
                )
        assert errors[512] < errors[128]

    def test_single_spot_strike_consistent_with_pricer(self):
        model = make_model()
        points = smile(model, 64, [1.0], 1.0, n_cos=512)
        assert len(points) == 1
        assert points[0].k == 0.0
        price = cos_call_price(model, 64, 1.0, 1.0, n_cos=512)
        assert points[0].iv == pytest.approx(
            implied_vol(price, 1.0, 1.0, 1.0), abs=1e-9
        )

    def test_unpriceable_strike_warned_and_skipped(self):
        model = deterministic_model(sigma=0.2)
        strikes = [1.0, 50.0]  # deep OTM strike prices to ~0: no-arbitrage violation
        with pytest.warns(UserWarning, match="skipped"):
            points = smile(model, 64, strikes, 1.0)
        assert len(points) == 1
        assert points[0].k == 0.0

    def test_empty_strikes_rejected(self):
        with pytest.raises(ConfigurationError):
            smile(make_model(), 64, [], 1.0)


# ---------------------------------------------------------------------------
# ATM skew and power-law fit
# ---------------------------------------------------------------------------


class TestAtmSkew:
    def test_deterministic_model_zero_skew(self):
        point = atm_skew(deterministic_model(sigma=0.2), 64, 1.0)
        assert abs(point.skew) <= 1e-6
        assert point.maturity == 1.0

    def test_uncorrelated_model_nearly_symmetric(self):
        model = make_model(theta=0.0, rho=0.0)
        point = atm_skew(model, 64, 1.0, n_cos=512)
        assert abs(point.skew) < 5e-3

    def test_correlated_model_negative_skew(self):
        point = atm_skew(make_model(), 128, 1.0, n_cos=512)
        assert point.skew < -1e-2

    def test_step_validation(self):
        with pytest.raises(ConfigurationError):
            atm_skew(make_model(), 64, 1.0, h=0.1)
        with pytest.raises(ConfigurationError):
            atm_skew(make_model(), 64, 1.0, h=1e-5)


class TestFitPowerLaw:
    def test_exact_log_linear_data(self):
        maturities = [0.05, 0.1, 0.25, 0.5, 1.0]
        points = [SkewPoint(t, -2.0 * t**-0.3) for t in maturities]
        c, p = fit_power_law(points)
        assert c == pytest.approx(2.0, abs=1e-10)
        assert p == pytest.approx(-0.3, abs=1e-10)

    def test_accepts_bare_pairs(self):
        c, p = fit_power_law([(0.1, 0.5), (0.2, 0.5), (0.4, 0.5)])
        assert c == pytest.approx(0.5, abs=1e-12)
        assert p == pytest.approx(0.0, abs=1e-12)

    def test_repeated_maturity_degenerate(self):
        points = [SkewPoint(0.5, -1.0), SkewPoint(0.5, -1.1), SkewPoint(1.0, -0.9)]
        with pytest.raises(DegenerateFitError):
            fit_power_law(points)

    def test_too_few_points(self):
        with pytest.raises(ConfigurationError):
            fit_power_law([SkewPoint(0.5, -1.0), SkewPoint(1.0, -0.9)])

    def test_zero_skew_rejected(self):
        with pytest.raises(ConfigurationError):
            fit_power_law([(0.1, 0.0), (0.2, -0.5), (0.4, -0.3)])
