"""Log-trigonometric definite integrals from trigonometric product identities.

The package evaluates integrals such as the integral of ln sin over [0, pi]
by turning exact product identities at rational multiples of pi into
Riemann sums with a known finite-N residual, and checks every result
against an independent tanh-sinh quadrature.
"""

from .errors import (
    BadIntegrandError,
    DomainError,
    InvalidParameterError,
    InvalidPrecisionError,
    InvalidSplitError,
    LogTrigError,
    NearSingularProductError,
    NoConvergenceError,
    NonFiniteInputError,
)
from .identities import (
    Family,
    IdentityCase,
    IdentityCheckResult,
    check_identity,
    cos_sq_product,
    half_sin_sq_product,
    shifted_sin_product,
    sin_product,
    tan_product,
)
from .numerics import (
    DEFAULT_PRECISION,
    ExtReal,
    SumAccumulator,
    compensated_sum,
    const_ln2,
    const_pi,
    lngamma,
)
from .oracle import (
    IntegrandSpec,
    QuadratureResult,
    oracle_check,
    split_at_interior_singularity,
    tanh_sinh_integrate,
)
from .riemann import (
    ConvergenceReport,
    IntegralTarget,
    RiemannRecord,
    TargetId,
    converge,
    gamma_reflection_sum,
    get_target,
    log_sin_sum,
    riemann_sum,
)

__version__ = "0.1.0"
