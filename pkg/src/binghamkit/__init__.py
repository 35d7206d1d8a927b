"""Bingham distributions on the unit-quaternion sphere.

Core surface: quaternion algebra, the five continuous parametrizations,
the table-free normalizing constant with analytic derivatives, the NLL
loss with gradients, rejection sampling, and slow oracles for validation.
"""

from .distribution import (
    BinghamParams,
    SymmetryClass,
    SymmetryKind,
    classify_symmetry,
    log_pdf,
    mode,
    pdf,
    sort_and_shift,
    trace_indicator,
)
from .errors import (
    BinghamKitError,
    DegenerateEigenvalues,
    DegenerateInput,
    EnvelopeFailure,
    InvalidParameter,
    NumericalFailure,
    NumericalWarning,
)
from .loss import (
    FitResult,
    LossReport,
    OptimizerSettings,
    batch_nll_from_params,
    batch_nll_grad,
    fit_mle,
    nll,
    nll_from_params,
    nll_grad,
)
from .normalizer import (
    NormalizerOutput,
    QuadratureConfig,
    convergence_check,
    derive_constants,
    normalizing_constant,
    weight,
)
from .parametrization import (
    ParamVector,
    birdal,
    cayley,
    lambda3,
    lambda4,
    param_jacobian,
    realize,
    softplus,
    triu,
    triu_inverse,
)
from .quaternion import (
    conjugate,
    delta_q,
    norm,
    normalize,
    omega_l,
    omega_r,
    qmul,
    to_rotation_matrix,
)
from .sampler import SampleBatch, delta_q_stats, sample

__version__ = "0.1.0"
