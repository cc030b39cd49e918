"""Gaussian stochastic volatility with general Volterra kernels.

Fourier-analytic pricing, exact-law Monte Carlo simulation and smile/skew
calibration for log-price models whose instantaneous volatility is a Gaussian
Volterra process. The public API is re-exported here from the submodules.
"""

from .acceptance import CriterionResult, criterion_numbers, run_all, run_criterion
from .calibration import (
    PARAMETER_NAMES,
    CalibrationProblem,
    CalibrationResult,
    calibrate,
    decode_parameter,
    encode_parameter,
    objective,
)
from .charfn import (
    TransformQuery,
    TransformValue,
    joint_transform,
    markovian_transform,
    symmetric_operator_transform,
    symmetric_spectral_transform,
    transform_curve,
)
from .cli import NumericsConfig, RunConfig, main, parse_config, run_command
from .errors import (
    AdmissibilityWarning,
    BoundsError,
    ConfigurationError,
    DegenerateFitError,
    DomainError,
    GaussvolError,
    NumericalError,
    PhaseUnwrapError,
    SingularMatrixError,
)
from .kernels import (
    AffineCurve,
    BrownianBridgeKernel,
    ConstantKernel,
    DiscretizedModel,
    FractionalAffineCurve,
    InputCurveSpec,
    KernelSpec,
    ModelConfig,
    RiemannLiouvilleKernel,
    TabulatedConvolutionKernel,
    TabulatedCurve,
    build_K_matrix,
    build_Sigma0_matrix,
    build_Sigma_t_matrix,
    build_g_vector,
    discretize,
    kernel_eval,
    sigma0_point,
)
from .montecarlo import (
    SimulatedPaths,
    SimulationPlan,
    mc_call_price,
    mc_joint_transform,
    simulate_paths,
)
from .operators import (
    RiccatiCoefficients,
    build_psi_matrix,
    build_sigma_tilde,
    lu_det_and_solve,
    phi_exponent_via_trace,
    quadratic_form,
    transform_log_value,
)
from .pricing import (
    SkewPoint,
    SmilePoint,
    atm_skew,
    bs_call_price,
    cos_call_price,
    fit_power_law,
    implied_vol,
    smile,
)
from .specfun import (
    PhaseTrack,
    gamma_fn,
    hyp2f1_special,
    principal_sqrt,
    unwrap_phase,
)

__version__ = "0.1.0"

__all__ = [
    # errors and warnings
    "AdmissibilityWarning",
    "BoundsError",
    "ConfigurationError",
    "DegenerateFitError",
    "DomainError",
    "GaussvolError",
    "NumericalError",
    "PhaseUnwrapError",
    "SingularMatrixError",
    # special functions
    "PhaseTrack",
    "gamma_fn",
    "hyp2f1_special",
    "principal_sqrt",
    "unwrap_phase",
    # kernels, curves and discretization
    "AffineCurve",
    "BrownianBridgeKernel",
    "ConstantKernel",
    "DiscretizedModel",
    "FractionalAffineCurve",
    "InputCurveSpec",
    "KernelSpec",
    "ModelConfig",
    "RiemannLiouvilleKernel",
    "TabulatedConvolutionKernel",
    "TabulatedCurve",
    "build_K_matrix",
    "build_Sigma0_matrix",
    "build_Sigma_t_matrix",
    "build_g_vector",
    "discretize",
    "kernel_eval",
    "sigma0_point",
    # operator algebra
    "RiccatiCoefficients",
    "build_psi_matrix",
    "build_sigma_tilde",
    "lu_det_and_solve",
    "phi_exponent_via_trace",
    "quadratic_form",
    "transform_log_value",
    # joint transform
    "TransformQuery",
    "TransformValue",
    "joint_transform",
    "markovian_transform",
    "symmetric_operator_transform",
    "symmetric_spectral_transform",
    "transform_curve",
    # pricing
    "SkewPoint",
    "SmilePoint",
    "atm_skew",
    "bs_call_price",
    "cos_call_price",
    "fit_power_law",
    "implied_vol",
    "smile",
    # Monte Carlo
    "SimulatedPaths",
    "SimulationPlan",
    "mc_call_price",
    "mc_joint_transform",
    "simulate_paths",
    # calibration
    "PARAMETER_NAMES",
    "CalibrationProblem",
    "CalibrationResult",
    "calibrate",
    "decode_parameter",
    "encode_parameter",
    "objective",
    # self-checks
    "CriterionResult",
    "criterion_numbers",
    "run_all",
    "run_criterion",
    # command line
    "NumericsConfig",
    "RunConfig",
    "main",
    "parse_config",
    "run_command",
    "__version__",
]
