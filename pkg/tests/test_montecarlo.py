"""Tests for the exact-Gaussian-path Monte Carlo oracle.

Statistical assertions use fixed seeds and three/four standard-error bands;
exactness assertions (deterministic degenerate cases, mirroring, seed
reproducibility) are bitwise or near machine precision.
"""

import math

import numpy as np
import pytest
from scipy.linalg import solve_triangular

from gaussvol.charfn import markovian_transform
from gaussvol.errors import ConfigurationError, DomainError
from gaussvol.kernels import (
    AffineCurve,
    BrownianBridgeKernel,
    ConstantKernel,
    ModelConfig,
    RiemannLiouvilleKernel,
    discretize,
)
from gaussvol.montecarlo import (
    SimulationPlan,
    mc_call_price,
    mc_joint_transform,
    simulate_paths,
)
from gaussvol.pricing import _markovian_price_curve, bs_call_price

REF_PARAMS = dict(s0=1.0, x0=0.1, theta=0.1, kappa=0.0, nu=0.25, rho=-0.7)


def make_model(
    kernel=None,
    curve=None,
    s0=1.0,
    kappa=0.0,
    nu=0.25,
    rho=-0.7,
    horizon=1.0,
):
    return ModelConfig(
        s0=s0,
        kernel=kernel if kernel is not None else ConstantKernel(),
        curve=curve if curve is not None else AffineCurve(x0=0.1, theta=0.1),
        kappa=kappa,
        nu=nu,
        rho=rho,
        horizon=horizon,
    )


def ref_model(kernel=None):
    # The drift constant theta acts through the curve: g(t) = x0 + theta t.
    return make_model(
        kernel=kernel,
        curve=AffineCurve(x0=REF_PARAMS["x0"], theta=REF_PARAMS["theta"]),
        s0=REF_PARAMS["s0"],
        kappa=REF_PARAMS["kappa"],
        nu=REF_PARAMS["nu"],
        rho=REF_PARAMS["rho"],
    )


class TestSimulationPlan:
    def test_fields_and_default(self):
        plan = SimulationPlan(n_steps=16, n_paths=100, seed=7)
        assert plan.n_steps == 16
        assert plan.n_paths == 100
        assert plan.seed == 7
        assert plan.antithetic is False

    @pytest.mark.parametrize("bad", [1, 0, -3, 2.5, "8"])
    def test_rejects_bad_step_count(self, bad):
        with pytest.raises(ConfigurationError):
            SimulationPlan(n_steps=bad, n_paths=10, seed=0)

    @pytest.mark.parametrize("bad", [1, 0, -2, 3.5])
    def test_rejects_bad_path_count(self, bad):
        with pytest.raises(ConfigurationError):
            SimulationPlan(n_steps=4, n_paths=bad, seed=0)

    @pytest.mark.parametrize("bad", [-1, 2**64, 1.5, None])
    def test_rejects_bad_seed(self, bad):
        with pytest.raises(ConfigurationError):
            SimulationPlan(n_steps=4, n_paths=10, seed=bad)

    def test_rejects_odd_path_count_with_antithetic(self):
        with pytest.raises(ConfigurationError):
            SimulationPlan(n_steps=4, n_paths=101, seed=0, antithetic=True)
        SimulationPlan(n_steps=4, n_paths=102, seed=0, antithetic=True)


class TestSimulatePaths:
    @pytest.mark.parametrize(
        "kernel",
        [ConstantKernel(), RiemannLiouvilleKernel(hurst=0.3), BrownianBridgeKernel(t1=1.5)],
        ids=lambda k: type(k).__name__,
    )
    def test_zero_vol_paths_follow_curve_exactly(self, kernel):
        model = make_model(kernel=kernel, nu=0.0)
        plan = SimulationPlan(n_steps=16, n_paths=8, seed=3)
        disc = discretize(model, plan.n_steps)
        out = simulate_paths(model, plan)
        assert np.array_equal(out.x, np.tile(disc.g_vec, (plan.n_paths, 1)))
        expected_iv = disc.step * float(np.sum(disc.g_vec**2))
        assert out.integrated_variance == pytest.approx(expected_iv, rel=1e-15)

    def test_zero_vol_with_reversion_solves_drift_system(self):
        model = make_model(nu=0.0, kappa=0.8)
        plan = SimulationPlan(n_steps=32, n_paths=5, seed=3)
        disc = discretize(model, plan.n_steps)
        expected = solve_triangular(
            np.eye(32) - 0.8 * disc.K_mat, disc.g_vec, lower=True, unit_diagonal=True
        )
        out = simulate_paths(model, plan)
        assert np.allclose(out.x, expected[None, :], rtol=1e-14, atol=0.0)
        # All paths identical: the volatility is deterministic.
        assert np.array_equal(out.x[0], out.x[-1])

    def test_first_grid_point_is_curve_value_exactly(self):
        # The first noise coordinate is excluded from the factorisation, so
        # X at t=0 is the curve value bit for bit even with nu > 0.
        model = make_model(kernel=RiemannLiouvilleKernel(hurst=0.3), nu=0.4)
        plan = SimulationPlan(n_steps=8, n_paths=64, seed=11)
        out = simulate_paths(model, plan)
        assert np.all(out.x[:, 0] == 0.1)

    def test_midpoint_variance_matches_brownian_scaling(self):
        # Constant kernel, no reversion, flat curve: X(t) = x0 + nu W(t).
        model = make_model(curve=AffineCurve(x0=0.2, theta=0.0), nu=0.5)
        n_paths = 20000
        plan = SimulationPlan(n_steps=16, n_paths=n_paths, seed=42)
        out = simulate_paths(model, plan)
        mid = out.x[:, 8]  # t = 0.5
        target = 0.5**2 * 0.5  # nu^2 t
        sample_var = float(np.var(mid, ddof=1))
        se = target * math.sqrt(2.0 / (n_paths - 1))
        assert abs(sample_var - target) <= 3.0 * se

    def test_mean_integrated_variance_matches_moment_identity(self):
        model = make_model(kernel=RiemannLiouvilleKernel(hurst=0.3), nu=0.25)
        n_paths = 20000
        plan = SimulationPlan(n_steps=32, n_paths=n_paths, seed=5)
        disc = discretize(model, plan.n_steps)
        target = disc.step * float(
            np.sum(disc.g_vec**2 + np.diag(disc.Sigma_mat))
        )
        out = simulate_paths(model, plan)
        est = float(np.mean(out.integrated_variance))
        se = float(np.std(out.integrated_variance, ddof=1)) / math.sqrt(n_paths)
        assert abs(est - target) <= 3.0 * se

    def test_sample_covariance_matches_forward_matrix(self):
        model = make_model(kernel=RiemannLiouvilleKernel(hurst=0.3), nu=0.4)
        n_paths = 100_000
        plan = SimulationPlan(n_steps=16, n_paths=n_paths, seed=17)
        disc = discretize(model, plan.n_steps)
        out = simulate_paths(model, plan)
        centred = out.x - np.mean(out.x, axis=0, keepdims=True)
        entries = [(1, 1), (3, 2), (5, 5), (8, 3), (10, 10), (12, 7), (15, 15), (15, 1), (7, 7), (11, 4)]
        for i, j in entries:
            sample = float(centred[:, i] @ centred[:, j]) / (n_paths - 1)
            target = disc.Sigma_mat[i, j]
            se = math.sqrt(
                (disc.Sigma_mat[i, i] * disc.Sigma_mat[j, j] + target**2) / n_paths
            )
            assert abs(sample - target) <= 4.0 * se, (i, j)

    def test_identical_seed_is_bit_identical(self):
        model = make_model(kernel=RiemannLiouvilleKernel(hurst=0.3))
        plan = SimulationPlan(n_steps=8, n_paths=4096, seed=123)
        a = simulate_paths(model, plan)
        b = simulate_paths(model, plan)
        assert np.array_equal(a.x, b.x)
        assert np.array_equal(a.terminal_log_price, b.terminal_log_price)
        assert np.array_equal(a.integrated_variance, b.integrated_variance)

    def test_antithetic_pair_mean_recovers_curve(self):
        # Without reversion X = g + eps, so mirrored pairs average to the
        # curve exactly (one chunk: direct block then mirror block).
        model = make_model(kernel=RiemannLiouvilleKernel(hurst=0.3), nu=0.4)
        plan = SimulationPlan(n_steps=8, n_paths=64, seed=9, antithetic=True)
        disc = discretize(model, plan.n_steps)
        out = simulate_paths(model, plan)
        pair_mean = 0.5 * (out.x[:32] + out.x[32:])
        assert np.allclose(pair_mean, disc.g_vec[None, :], rtol=0.0, atol=1e-14)

    def test_singular_joint_covariance_is_jittered(self):
        # The constant kernel makes the convolution an exact linear
        # combination of the increments; the factorisation succeeds via the
        # single jitter retry and sampling stays consistent.
        model = make_model(nu=0.5, curve=AffineCurve(x0=0.2, theta=0.0))
        plan = SimulationPlan(n_steps=4, n_paths=4096, seed=21)
        out = simulate_paths(model, plan)
        assert np.all(np.isfinite(out.x))
        # X_1 - x0 and X_2 - X_1 should be nearly perfectly correlated with
        # the reconstruction from the path itself staying consistent:
        # Var(X at t1) = nu^2 * t1 within sampling error.
        var1 = float(np.var(out.x[:, 1], ddof=1))
        assert var1 == pytest.approx(0.25 * 0.25, rel=0.1)


class TestMcCallPrice:
    def test_zero_vol_matches_effective_vol_black_scholes(self):
        model = make_model(nu=0.0)
        n_steps = 500
        plan = SimulationPlan(n_steps=n_steps, n_paths=40_000, seed=77)
        strike = 1.05
        price, stderr, _ = mc_call_price(model, plan, strike, 1.0)
        disc = discretize(model, n_steps)
        sigma_eff = math.sqrt(disc.step * float(np.sum(disc.g_vec**2)))
        target = bs_call_price(1.0, strike, 1.0, sigma_eff)
        assert abs(price - target) <= 3.0 * stderr
        # The left-point effective vol is within 1e-3 (in price) of the
        # continuous-time volatility at this step count.
        sigma_cont = 0.1 * math.sqrt(7.0 / 3.0)  # sqrt(int (1+t)^2 dt) scaled
        assert abs(target - bs_call_price(1.0, strike, 1.0, sigma_cont)) <= 1e-3

    def test_interval_brackets_ode_price_brownian_case(self):
        model = ref_model()
        plan = SimulationPlan(n_steps=300, n_paths=60_000, seed=101, antithetic=True)
        price, stderr, ci95 = mc_call_price(model, plan, 1.0, 1.0)
        curve = _markovian_price_curve(
            s0=1.0, x0=0.1, theta=0.1, kappa=0.0, nu=0.25, rho=-0.7,
            maturity=1.0, n_points=512, big_l=12.0,
        )
        ode_price = curve.call_price(1.0)
        assert ci95[0] <= ode_price <= ci95[1]
        assert ci95 == (price - 1.96 * stderr, price + 1.96 * stderr)

    @pytest.mark.parametrize(
        "model",
        [ref_model(), make_model(kernel=RiemannLiouvilleKernel(hurst=0.3), nu=0.1)],
        ids=["brownian", "rough-low-vol-of-vol"],
    )
    def test_antithetic_reduces_stderr_at_the_money(self, model):
        # Mirroring cancels the odd part of the log-price, so pairing helps
        # whenever that part dominates the payoff (true here; with large
        # vol-of-vol on rough kernels the even quadratic terms can win and
        # pairing stops paying — see the decisions ledger).
        for seed in (11, 22, 33, 44, 55):
            plain = SimulationPlan(n_steps=64, n_paths=65_536, seed=seed)
            paired = SimulationPlan(
                n_steps=64, n_paths=65_536, seed=seed, antithetic=True
            )
            _, se_plain, _ = mc_call_price(model, plain, 1.0, 1.0)
            _, se_paired, _ = mc_call_price(model, paired, 1.0, 1.0)
            assert se_paired <= se_plain, seed

    def test_identical_seed_is_bit_identical(self):
        model = make_model()
        plan = SimulationPlan(n_steps=32, n_paths=10_000, seed=5, antithetic=True)
        first = mc_call_price(model, plan, 1.0, 1.0)
        second = mc_call_price(model, plan, 1.0, 1.0)
        assert first == second

    def test_common_draws_make_prices_decrease_in_strike(self):
        model = make_model(kernel=RiemannLiouvilleKernel(hurst=0.3))
        plan = SimulationPlan(n_steps=32, n_paths=8192, seed=2)
        prices = [mc_call_price(model, plan, k, 1.0)[0] for k in (0.9, 1.0, 1.1)]
        assert prices[0] > prices[1] > prices[2]

    @pytest.mark.parametrize("strike,maturity", [(-1.0, 1.0), (0.0, 1.0), (1.0, 0.0), (1.0, -2.0), (math.nan, 1.0)])
    def test_rejects_bad_strike_or_maturity(self, strike, maturity):
        model = make_model()
        plan = SimulationPlan(n_steps=8, n_paths=16, seed=0)
        with pytest.raises(ConfigurationError):
            mc_call_price(model, plan, strike, maturity)


class TestMcJointTransform:
    def test_degenerate_point_is_exactly_one(self):
        model = make_model(kernel=RiemannLiouvilleKernel(hurst=0.3))
        plan = SimulationPlan(n_steps=16, n_paths=256, seed=4)
        value, stderr = mc_joint_transform(model, plan, 0.0, 0.0)
        assert value == 1.0 + 0.0j
        assert stderr == 0.0

    def test_single_mode_toy_matches_chi_square_form(self):
        # Two steps with a flat zero curve leave a single Gaussian mode:
        # int X^2 = delta * X_1^2 with X_1 ~ N(0, nu^2 t_1), so the
        # transform at u=0 is the scalar chi-square moment generating form
        # (1 - 2 w delta nu^2 t_1)^(-1/2).
        nu, horizon, w = 0.5, 1.0, -1.0
        model = make_model(curve=AffineCurve(x0=0.0, theta=0.0), nu=nu, horizon=horizon)
        plan = SimulationPlan(n_steps=2, n_paths=20_000, seed=31)
        delta = horizon / 2.0
        target = (1.0 - 2.0 * w * delta * nu**2 * delta) ** -0.5
        value, stderr = mc_joint_transform(model, plan, 0.0, w)
        assert value.imag == 0.0
        assert abs(value.real - target) <= 3.0 * stderr

    def test_reference_point_within_three_stderr_of_ode(self):
        model = ref_model()
        plan = SimulationPlan(n_steps=400, n_paths=20_000, seed=13, antithetic=True)
        value, stderr = mc_joint_transform(model, plan, 0.5j, 0.0)
        reference = markovian_transform(
            s0=1.0, x0=0.1, theta=0.1, kappa=0.0, nu=0.25, rho=-0.7,
            horizon=1.0, u=0.5j, w=0.0,
        )
        assert abs(value - reference) <= 3.0 * stderr

    def test_martingale_at_unit_exponent(self):
        model = make_model(kernel=RiemannLiouvilleKernel(hurst=0.3), s0=1.3)
        plan = SimulationPlan(n_steps=128, n_paths=20_000, seed=8, antithetic=True)
        value, stderr = mc_joint_transform(model, plan, 1.0, 0.0)
        assert value.imag == 0.0
        assert abs(value.real - 1.3) <= 4.0 * stderr

    @pytest.mark.parametrize("u,w", [(-0.5, 0.0), (1.5, 0.0), (0.0, 0.5), (0.5 + 0.1j, 1e-6)])
    def test_rejects_inadmissible_points(self, u, w):
        model = make_model()
        plan = SimulationPlan(n_steps=8, n_paths=16, seed=0)
        with pytest.raises(DomainError):
            mc_joint_transform(model, plan, u, w)

    def test_identical_seed_is_bit_identical(self):
        model = make_model()
        plan = SimulationPlan(n_steps=16, n_paths=4096, seed=6)
        assert mc_joint_transform(model, plan, 0.3, -0.2) == mc_joint_transform(
            model, plan, 0.3, -0.2
        )
