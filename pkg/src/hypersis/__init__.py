"""SIS contagion on hypergraphs with nonlinear group infection rates.

The package couples four views of the same process: the exact
individual-level stochastic model, two deterministic mean-field
approximations (integer-argument and expectation-commuted), a linear
upper-bound model, and the spectral stability conditions that govern
whether the disease-free state attracts.
"""

from ._accel import BACKEND
from .errors import NumericalError, UnsupportedModelError, ValidationError
from .hypergraph import Hypergraph, SizeSpec, generate_random, partition_by_size
from .kernels import (
    Arctan,
    Identity,
    InfectionKernel,
    LogOnePlus,
    SaturatingMin,
    Tabulated,
    Threshold,
    graded_threshold_kernels,
    kernel_from_config,
    parse_kernel_arg,
)
from .meanfield import (
    ModelParams,
    Trajectory,
    integrate,
    jacobian_at_zero,
    make_rhs,
    rhs_expectation_commuted,
    rhs_integer_argument,
    rhs_linear_bound,
    rhs_multitype,
)
from .poisson_binomial import f_load, pmf_dft, pmf_enum
from .spectral import (
    ThresholdReport,
    evaluate_conditions,
    extinction_time_bound,
    lambda_max,
    survival_bound,
)
from .stochastic import (
    EnsembleSummary,
    RunConfig,
    RunResult,
    infection_rates,
    run_ensemble,
    run_trajectory,
    step_discretized,
    step_event_driven,
    trimmed_envelope,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ValidationError",
    "UnsupportedModelError",
    "NumericalError",
    "Hypergraph",
    "SizeSpec",
    "generate_random",
    "partition_by_size",
    "InfectionKernel",
    "Identity",
    "Arctan",
    "LogOnePlus",
    "SaturatingMin",
    "Threshold",
    "Tabulated",
    "kernel_from_config",
    "parse_kernel_arg",
    "graded_threshold_kernels",
    "pmf_dft",
    "pmf_enum",
    "f_load",
    "ModelParams",
    "Trajectory",
    "make_rhs",
    "rhs_integer_argument",
    "rhs_expectation_commuted",
    "rhs_multitype",
    "rhs_linear_bound",
    "integrate",
    "jacobian_at_zero",
    "RunConfig",
    "RunResult",
    "EnsembleSummary",
    "infection_rates",
    "step_discretized",
    "step_event_driven",
    "run_trajectory",
    "run_ensemble",
    "trimmed_envelope",
    "lambda_max",
    "ThresholdReport",
    "evaluate_conditions",
    "survival_bound",
    "extinction_time_bound",
]
