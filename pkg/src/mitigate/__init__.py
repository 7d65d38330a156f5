"""Backdoor mitigation: global (Fourier-heavy) and local (linear, polynomial) mitigators."""

from ._kernels import backend
from .adversary import (
    Certificate,
    eps_mass_random_attack,
    flat_bump_polynomials,
    linear_bias_attack,
    missing_coefficient_attack,
    spectral_perturbation_attack,
    targeted_ball_attack,
)
from .distributions import (
    AffineModel,
    BoundedUniform,
    LabeledPopulation,
    NoNoise,
    PolynomialModel,
    ScaledRademacher,
    TruncatedGaussian,
    make_shallow_tree,
    make_tau_heavy,
    sample_labeled,
)
from .errors import (
    BudgetExceeded,
    ConfigError,
    DegenerateRay,
    DimensionError,
    EmptySample,
    InadmissibleAttack,
    InsufficientAcceptance,
    MitigateError,
    NumericalError,
    ShapeError,
    SingularSystem,
)
from .fourier import FourierSpectrum, GLConfig, goldreich_levin, mask_of, wht_bruteforce
from .geometry import Box, MembershipBody, UnitBall, correlated_pair, correlated_tuple, resample
from .global_mitigator import (
    LabelTable,
    binary_heavy_mitigate,
    fourier_heavy_mitigate,
    loss_decomposition_bruteforce,
    sample_budget,
    sign_compose,
)
from .harness import ExperimentConfig, run_experiment, security_suite
from .local_linear import (
    AdvancedLinearConfig,
    BasicLinearConfig,
    advanced_linear_mitigate,
    basic_linear_mitigate,
    interpolate_pair,
)
from .local_poly import PolyConfig, poly_mitigate, vandermonde_inverse_norm_bound, vandermonde_solve
from .oracle import FunctionOracle, Hypercube, LossKind, MitigationParams, oracle_from
from .robust import RoundingConfig, mean_of_medians, median, median_of_means, wrap_with_rounding
from .streams import substream

__version__ = "0.1.0"
