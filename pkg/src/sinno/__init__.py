"""Stochastic interpolation neural network operators with sigmoidal activations."""

from .activation import (
    Activation,
    Sigmoidal,
    bspline_value,
    discrete_moment,
    eval_activation,
    eval_sigmoidal,
    moment_bound,
    parse_activation,
)
from .errors import (
    AlignmentError,
    DomainError,
    FitError,
    InputError,
    NotFoundError,
    SchemaError,
    SinnoError,
)
from .metrics import (
    ModulusEstimate,
    MseReport,
    RateFit,
    chebyshev_bound_check,
    mc_sweep,
    modulus_estimate,
    mse_global,
    mse_nodes,
    mse_query,
    rate_fit,
)
from .operator import SinnoOperator, UniformGrid, build_operator, evaluate, evaluate_many
from .processes import (
    OUProcess,
    SamplePath,
    SeedSpec,
    WienerProcess,
    simulate_ou,
    simulate_wiener,
)

__version__ = "0.1.0"
