"""Simulation and verification toolkit for bifractional Brownian motion,
including the extended regime K in (1, 2)."""

__version__ = "0.1.0"

from .covkernels import (  # noqa: E402
    BifBm,
    BifParams,
    FBm,
    SubFBm,
    TimeChanged,
    TimeGrid,
    XK,
    bifbm,
    cov,
    covariance_matrix,
    increment_variance,
    quasi_helix_bounds,
    x_hk,
)
from .errors import (  # noqa: E402
    DomainError,
    NotPositiveSemidefiniteError,
    NumericalError,
    RegimeError,
    TruncationError,
)
from .samplers import (  # noqa: E402
    GaussianFactor,
    PathEnsemble,
    cholesky_factor,
    sample_decomposition,
    sample_exact,
    sample_xk_wiener,
)
