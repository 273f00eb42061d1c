"""Laplace covariance model: structured full covariance with linear memory.

``Sigma = diag(d) + diag(w) K(a) diag(w)`` where ``K(a)[i, j] = exp(-|a_i - a_j|)``
over one latent coordinate per channel.  Kernel products cost a sort plus two
linear sweeps, and the exact Gaussian likelihood reduces to a scalar Kalman
filter over the sorted channels.
"""
__version__ = "0.1.0"

from ._dense import DEFAULT_DENSE_CAP, dense_cap, dense_cap_set, dense_forbidden
from .aggregation import DENSE, Sampled, TaskWeights, aggregate_dense, aggregate_mean, aggregate_refit
from .errors import (
    DataError,
    DivergenceError,
    FormatError,
    InputError,
    LcmError,
    LengthError,
    NumericalError,
    ParseError,
    SchemaError,
    SingularityError,
    SizeError,
    VersionError,
)
from .fitting import Adam, FitResult, fit, initial_params, run_fit
from .kernel import (
    SortedView,
    dense_kernel,
    kernel_matvec,
    kernel_quadform,
    kernel_quadform_grad_a,
    sorted_view,
)
from .model import (
    DiagonalGaussian,
    FeatureBatch,
    FitConfig,
    FrobeniusGrad,
    LcmParams,
    diag_mle,
    empirical_frobenius_sq,
    frobenius_grad,
    frobenius_loss_decomposed,
    frobenius_loss_dense,
    frobenius_value_and_grad,
    materialize_covariance,
)
from .precision import (
    Ar1Chain,
    TridiagonalPrecision,
    ar1_chain,
    kernel_logdet,
    kernel_precision,
    kernel_precision_quadform,
)
from .ssm import (
    InnovationSequence,
    gaussian_nll,
    gaussian_nll_per_sample,
    kalman_innovations,
    lcm_logdet,
    mahalanobis,
    sample,
)
