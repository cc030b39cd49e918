"""Tests for the joint-transform module.

Oracles:

* backward Riccati ODEs for the constant kernel (independent integration
  route, plus a hyperbolic-tangent closed form for the scalar real case);
* one-dimensional Gaussian quadrature for single-mode symmetric kernels,
  with the integrand derived from scratch via conditional Gaussian moments;
* per-mode bivariate Gaussian quadratic-form expectations (2x2 determinant
  formula) for finite-rank symmetric kernels;
* the sandwiched-versus-plain determinant identity on causal kernels.
"""

import cmath
import math

import numpy as np
import pytest
from scipy.integrate import quad

from gaussvol.charfn import (
    TransformQuery,
    _markovian_curve,
    joint_transform,
    markovian_transform,
    symmetric_operator_transform,
    symmetric_spectral_transform,
    transform_curve,
)
from gaussvol.errors import ConfigurationError, DomainError
from gaussvol.kernels import (
    AffineCurve,
    BrownianBridgeKernel,
    ConstantKernel,
    ModelConfig,
    RiemannLiouvilleKernel,
    TabulatedConvolutionKernel,
    discretize,
)
from gaussvol.operators import (
    RiccatiCoefficients,
    build_sigma_tilde,
    lu_det_and_solve,
)

# Shared reference parameter set used across the suite: constant
# kernel, x0 = theta = 0.1, kappa = 0, nu = 0.25, rho = -0.7, T = 1.
REF_PARAMS = dict(
    s0=1.0, x0=0.1, theta=0.1, kappa=0.0, nu=0.25, rho=-0.7, horizon=1.0
)

# exp(-(1/2) ln cosh(c) - tanh(c)/(sqrt(2) nu) * x0^2), c = sqrt(2) nu T,
# at nu=0.25, T=1, x0=0.1 (mpmath, 50 digits, rounded to double).
TANH_CASE_VALUE = 0.96057517657460942


def reference_model(s0=1.0, kernel=None):
    return ModelConfig(
        s0=s0,
        kernel=kernel if kernel is not None else ConstantKernel(),
        curve=AffineCurve(x0=0.1, theta=0.1),
        kappa=0.0,
        nu=0.25,
        rho=-0.7,
        horizon=1.0,
    )


def reference_markovian(u, w, s0=1.0, **overrides):
    params = dict(REF_PARAMS, s0=s0, **overrides)
    return markovian_transform(
        params["s0"],
        params["x0"],
        params["theta"],
        params["kappa"],
        params["nu"],
        params["rho"],
        params["horizon"],
        u,
        w,
    )


# ---------------------------------------------------------------------------
# TransformQuery
# ---------------------------------------------------------------------------


class TestTransformQuery:
    @pytest.mark.parametrize(
        "u, w",
        [(0.0, 0.0), (1.0, 0.0), (0.5j, 0.0), (1.0, -3.0), (0.5 + 4.0j, -0.1)],
    )
    def test_admissible(self, u, w):
        assert TransformQuery(u, w).admissible

    @pytest.mark.parametrize(
        "u, w",
        [(-0.01, 0.0), (1.01, 0.0), (0.5, 0.01), (2.0 + 1.0j, -1.0)],
    )
    def test_inadmissible(self, u, w):
        assert not TransformQuery(u, w).admissible


# ---------------------------------------------------------------------------
# joint_transform
# ---------------------------------------------------------------------------


ALL_KERNEL_MODELS = [
    ConstantKernel(),
    RiemannLiouvilleKernel(hurst=0.3),
    BrownianBridgeKernel(t1=1.5),
    TabulatedConvolutionKernel(
        tau=np.linspace(0.0, 1.5, 7), values=1.0 / (1.0 + np.linspace(0.0, 1.5, 7))
    ),
]


class TestJointTransform:
    @pytest.mark.parametrize("kernel", ALL_KERNEL_MODELS, ids=lambda k: type(k).__name__)
    def test_unit_at_zero_query(self, kernel):
        model = reference_model(s0=1.4, kernel=kernel)
        out = joint_transform(model, 16, TransformQuery(0.0, 0.0))
        assert out.value == pytest.approx(1.0 + 0.0j, abs=1e-12)
        assert out.quad == 0 and out.logdet_unwrapped == 0

    @pytest.mark.parametrize("kernel", ALL_KERNEL_MODELS, ids=lambda k: type(k).__name__)
    def test_martingale_query_returns_spot(self, kernel):
        model = reference_model(s0=1.7, kernel=kernel)
        out = joint_transform(model, 16, TransformQuery(1.0, 0.0))
        assert out.value == pytest.approx(1.7 + 0.0j, abs=1.7e-12)

    def test_inadmissible_query_rejected(self):
        model = reference_model()
        with pytest.raises(DomainError):
            joint_transform(model, 16, TransformQuery(1.5, 0.0))
        with pytest.raises(DomainError):
            joint_transform(model, 16, TransformQuery(0.5j, 0.2))

    def test_reference_case_matches_ode_oracle(self):
        model = reference_model()
        out = joint_transform(model, 512, TransformQuery(0.5j, 0.0))
        oracle = reference_markovian(0.5j, 0.0)
        assert out.value == pytest.approx(oracle, rel=1e-3)

    def test_value_assembles_from_parts(self):
        model = reference_model(s0=1.3)
        query = TransformQuery(0.8j, -0.4)
        out = joint_transform(model, 32, query)
        rebuilt = cmath.exp(
            query.u * math.log(1.3) + out.quad - 0.5 * out.logdet_unwrapped
        )
        assert out.value == pytest.approx(rebuilt, rel=1e-14)

    @pytest.mark.parametrize("kernel", [ConstantKernel(), RiemannLiouvilleKernel(hurst=0.2)])
    @pytest.mark.parametrize("u, w", [(0.5j, 0.0), (2.0j, -0.3), (5.0j, -1.0)])
    def test_modulus_bounded_by_one(self, kernel, u, w):
        model = reference_model(s0=1.0, kernel=kernel)
        out = joint_transform(model, 64, TransformQuery(u, w))
        assert abs(out.value) <= 1.0 + 1e-8


# ---------------------------------------------------------------------------
# transform_curve
# ---------------------------------------------------------------------------


class TestTransformCurve:
    def test_single_zero_frequency(self):
        values = transform_curve(reference_model(), 16, [0.0], 0.0)
        assert values.shape == (1,)
        assert values[0] == 1.0 + 0.0j

    def test_zero_anchor_in_longer_grid(self):
        values = transform_curve(reference_model(), 32, [0.0, 1.0, 2.0], 0.0)
        assert values[0] == 1.0 + 0.0j
        assert np.all(np.abs(values) <= 1.0 + 1e-8)

    @pytest.mark.parametrize("kernel", [ConstantKernel(), RiemannLiouvilleKernel(hurst=0.3)])
    def test_hermitian_mirror(self, kernel):
        model = reference_model(kernel=kernel)
        z_grid = np.linspace(0.0, 15.0, 31)
        values = transform_curve(model, 64, z_grid, 0.0)
        mirrored = transform_curve(model, 64, -z_grid, 0.0)
        np.testing.assert_allclose(mirrored, np.conj(values), atol=1e-10, rtol=0)
        # Single-point evaluations must agree with the curve route too.
        for z_k, v_k in zip(z_grid[1::10], values[1::10]):
            point = joint_transform(model, 64, TransformQuery(-1j * z_k, 0.0))
            assert point.value == pytest.approx(np.conj(v_k), abs=1e-10)

    def test_reference_grid_matches_ode_oracle(self):
        model = reference_model()
        z_grid = np.linspace(0.0, 79.5, 160)
        values = transform_curve(model, 512, z_grid, 0.0)
        oracle = _markovian_curve(
            REF_PARAMS["s0"],
            REF_PARAMS["x0"],
            REF_PARAMS["theta"],
            REF_PARAMS["kappa"],
            REF_PARAMS["nu"],
            REF_PARAMS["rho"],
            REF_PARAMS["horizon"],
            z_grid,
        )
        assert np.max(np.abs(values - oracle)) <= 1e-3

    def test_grid_refinement_reduces_oracle_error(self):
        model = reference_model()
        z_grid = np.linspace(0.0, 30.0, 16)
        oracle = _markovian_curve(
            1.0, 0.1, 0.1, 0.0, 0.25, -0.7, 1.0, z_grid
        )
        err_fine = np.abs(transform_curve(model, 512, z_grid, 0.0) - oracle)
        err_coarse = np.abs(transform_curve(model, 128, z_grid, 0.0) - oracle)
        assert np.all(err_fine[1:] < err_coarse[1:])

    def test_grid_validation(self):
        model = reference_model()
        with pytest.raises(ConfigurationError):
            transform_curve(model, 16, [1.0, 2.0], 0.0)
        with pytest.raises(ConfigurationError):
            transform_curve(model, 16, [0.0, 2.0, 1.0], 0.0)
        with pytest.raises(ConfigurationError):
            transform_curve(model, 16, [], 0.0)
        with pytest.raises(DomainError):
            transform_curve(model, 16, [0.0, 1.0], 0.2)


# ---------------------------------------------------------------------------
# markovian_transform
# ---------------------------------------------------------------------------


class TestMarkovianTransform:
    def test_unit_at_zero_query(self):
        assert reference_markovian(0.0, 0.0) == pytest.approx(1.0, abs=1e-14)

    def test_degenerate_linear_case(self):
        # nu = theta = kappa = 0 integrates by hand: value exp(u ln s0 + a x0^2 T).
        u, w = 0.3 + 0.2j, -0.4
        a = w + 0.5 * (u * u - u)
        expected = cmath.exp(u * math.log(1.3) + a * 0.7**2 * 2.0)
        out = markovian_transform(1.3, 0.7, 0.0, 0.0, 0.0, 0.0, 2.0, u, w)
        assert out == pytest.approx(expected, rel=1e-12)

    def test_scalar_riccati_tanh_closed_form(self):
        nu, horizon, x0 = 0.25, 1.0, 0.1
        c = math.sqrt(2.0) * nu * horizon
        closed = math.exp(
            -0.5 * math.log(math.cosh(c))
            - math.tanh(c) / (math.sqrt(2.0) * nu) * x0 * x0
        )
        assert closed == pytest.approx(TANH_CASE_VALUE, rel=1e-15)
        out = markovian_transform(1.0, x0, 0.0, 0.0, nu, 0.0, horizon, 0.0, -1.0)
        assert out == pytest.approx(TANH_CASE_VALUE, rel=1e-8)

    def test_stable_under_step_halving(self):
        args = (1.0, 0.1, 0.1, 0.0, 0.25, -0.7, 1.0, 0.7j, -0.5)
        coarse = markovian_transform(*args)
        fine = markovian_transform(*args, n_steps=40000)
        assert abs(coarse - fine) <= 1e-8 * abs(fine)

    def test_blowup_detected(self):
        with pytest.raises(DomainError):
            markovian_transform(1.0, 0.1, 0.1, 0.0, 0.25, 0.0, 3.0, 0.0, 5.0)

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            markovian_transform(-1.0, 0.1, 0.1, 0.0, 0.25, 0.0, 1.0, 0.0, 0.0)
        with pytest.raises(ConfigurationError):
            markovian_transform(1.0, 0.1, 0.1, 0.0, 0.25, 0.0, -1.0, 0.0, 0.0)
        with pytest.raises(ConfigurationError):
            markovian_transform(1.0, 0.1, 0.1, 0.0, 0.25, -1.5, 1.0, 0.0, 0.0)
        with pytest.raises(ConfigurationError):
            markovian_transform(1.0, 0.1, 0.1, 0.0, 0.25, 0.0, 1.0, 0.0, 0.0, n_steps=10)


# ---------------------------------------------------------------------------
# symmetric-kernel oracles
# ---------------------------------------------------------------------------


RANK3 = dict(
    lambdas=(0.4, 0.2, 0.1), g_coeffs=(0.3, -0.2, 0.1), nu=0.25, rho=-0.7
)


def wishart_product_oracle(lambdas, g_coeffs, nu, rho, u, w):
    """Per-mode 2x2 Gaussian quadratic-form expectation, multiplied out.

    Mode n has the jointly Gaussian pair (curve-projection, driving normal)
    with mean (c_n, 0) and covariance [[nu^2 lam, nu sqrt(lam)],
    [nu sqrt(lam), 1]]; the transform weights its square through the matrix
    [[alpha, beta/2], [beta/2, 0]]. E[exp(z^T W z)] for z ~ N(mu, S) is
    det(I - 2 S W)^(-1/2) exp(mu^T W (I - 2 S W)^{-1} mu).
    """
    u = complex(u)
    w = complex(w)
    alpha = w + 0.5 * (u * u - u) - 0.5 * rho * rho * u * u
    beta = rho * u
    total = 1.0 + 0.0j
    for lam, c in zip(lambdas, g_coeffs):
        mean = np.array([c, 0.0])
        cov = np.array(
            [[nu * nu * lam, nu * math.sqrt(lam)], [nu * math.sqrt(lam), 1.0]]
        )
        weight = np.array([[alpha, beta / 2.0], [beta / 2.0, 0.0]])
        core = np.eye(2) - 2.0 * cov @ weight
        det = core[0, 0] * core[1, 1] - core[0, 1] * core[1, 0]
        exponent = mean @ weight @ np.linalg.solve(core, mean)
        total *= cmath.exp(exponent) / cmath.sqrt(det)
    return total


def single_mode_quadrature_oracle(lam, c, nu, rho, u, w):
    """Direct integral for one mode, derived from conditional Gaussian moments.

    With X = y e(t), y = c + nu sqrt(lam) xi, the price integral conditional
    on the volatility driver is Gaussian, leaving a one-dimensional integral
    over xi ~ N(0,1) of exp(q y^2 + r y xi) with
    q = w - u/2 + (1 - rho^2) u^2 / 2 and r = u rho.
    """
    u = complex(u)
    w = complex(w)
    q = w - u / 2.0 + (1.0 - rho * rho) * u * u / 2.0
    r = u * rho

    def integrand(xi, part):
        y = c + nu * math.sqrt(lam) * xi
        val = cmath.exp(q * y * y + r * y * xi) * math.exp(-0.5 * xi * xi)
        return val.real if part == "re" else val.imag

    scale = 1.0 / math.sqrt(2.0 * math.pi)
    re = quad(integrand, -12.0, 12.0, args=("re",), limit=200)[0]
    im = quad(integrand, -12.0, 12.0, args=("im",), limit=200)[0]
    return scale * (re + 1j * im)


class TestSymmetricSpectralTransform:
    def test_degenerate_modes_give_one(self):
        out = symmetric_spectral_transform([0.0, 0.0], [0.0, 0.0], 0.3, -0.5, 0.0, -1.0)
        assert out == 1.0 + 0.0j

    def test_chi_square_laplace_transform(self):
        w = -0.7
        out = symmetric_spectral_transform([1.0], [0.0], 1.0, 0.0, 0.0, w)
        assert out == pytest.approx((1.0 - 2.0 * w) ** -0.5, rel=1e-14)

    def test_real_laplace_quadrature_oracle(self):
        out = symmetric_spectral_transform([0.5], [0.8], 0.6, -0.3, 0.0, -1.2)
        oracle = single_mode_quadrature_oracle(0.5, 0.8, 0.6, -0.3, 0.0, -1.2)
        assert out == pytest.approx(oracle, rel=1e-10)

    def test_complex_quadrature_oracle(self):
        out = symmetric_spectral_transform([0.5], [0.8], 0.6, -0.7, 0.9j, -0.3)
        oracle = single_mode_quadrature_oracle(0.5, 0.8, 0.6, -0.7, 0.9j, -0.3)
        assert out == pytest.approx(oracle, rel=1e-9)

    @pytest.mark.parametrize(
        "u, w", [(0.5j, 0.0), (1.5j, -0.4), (3.0j, -1.0), (0.0, -2.0)]
    )
    def test_rank3_matches_per_mode_brute_force(self, u, w):
        out = symmetric_spectral_transform(u=u, w=w, **RANK3)
        oracle = wishart_product_oracle(u=u, w=w, **RANK3)
        assert out == pytest.approx(oracle, rel=1e-12)

    @pytest.mark.parametrize("u, w", [(1.2j, -0.5), (2.0j, 0.0)])
    def test_rank3_matches_operator_route(self, u, w):
        spectral = symmetric_spectral_transform(u=u, w=w, **RANK3)
        operator = symmetric_operator_transform(u=u, w=w, n_grid=400, **RANK3)
        assert operator == pytest.approx(spectral, rel=1e-8)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            symmetric_spectral_transform([0.5], [0.8], 0.6, -0.3, 0.1, -1.0)
        with pytest.raises(DomainError):
            symmetric_spectral_transform([0.5], [0.8], 0.6, -0.3, 0.0, 0.2)
        with pytest.raises(ConfigurationError):
            symmetric_spectral_transform([-0.5], [0.8], 0.6, -0.3, 0.0, -1.0)
        with pytest.raises(ConfigurationError):
            symmetric_spectral_transform([0.5, 0.2], [0.8], 0.6, -0.3, 0.0, -1.0)


class TestDeterminantFormEquivalence:
    def test_sandwiched_equals_plain_for_causal_kernel(self):
        # For a causal (triangular) kernel the shift factors have unit
        # determinant, so wrapping the middle factor changes nothing.
        disc = discretize(reference_model(), 32)
        coeff = RiccatiCoefficients.from_query(0.8j, -0.3, 0.0, 0.25, -0.7)
        shift = np.eye(32, dtype=complex) - coeff.b * disc.K_mat
        middle = np.eye(32, dtype=complex) - (
            2.0 * coeff.a * disc.step
        ) * build_sigma_tilde(disc, coeff.b)
        det_plain, _ = lu_det_and_solve(middle)
        det_sandwiched, _ = lu_det_and_solve(shift @ middle @ shift.T)
        assert det_sandwiched == pytest.approx(det_plain, rel=1e-12)
