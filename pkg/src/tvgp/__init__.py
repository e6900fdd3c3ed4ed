"""Tensor-variate Gaussian process covariance learning and inverse
inference of an unknown input vector by random-walk Metropolis-Hastings.
"""

from tvgp._kernels import BACKEND
from tvgp.analysis import HpdInterval, histogram, hpd, mode_estimate
from tvgp.covariance import (
    Sigma3Params,
    SpdMatrix,
    SqeKernelParams,
    build_sigma3,
    build_sqe_matrix,
    empirical_sigma2,
    whiten,
)
from tvgp.likelihood import GpModel, estimate_mean, log_likelihood, log_likelihood_augmented
from tvgp.posterior import (
    PARAM_NAMES,
    JointPosterior,
    ParamVector,
    PredictivePosterior,
    PriorSpec,
    Scheme,
    TrainingPosterior,
    log_posterior_joint,
    log_posterior_predictive,
    log_posterior_training,
    log_prior,
)
from tvgp.sampler import ChainConfig, Trace, accept_ratio, pilot_tune, propose, run_chain
from tvgp.synthetic import GpParams, colorize, generate_dataset, make_polar_grid
from tvgp.tensor import (
    DenseTensor,
    devectorize,
    frobenius_norm_sq,
    mode_product,
    slice_tensor,
    subtract,
    vectorize,
)
from tvgp.units import UnitConstants, bar_angle_deg, omega_bar

__version__ = "0.1.0"

__all__ = [
    "accept_ratio",
    "BACKEND",
    "bar_angle_deg",
    "build_sigma3",
    "build_sqe_matrix",
    "ChainConfig",
    "colorize",
    "DenseTensor",
    "devectorize",
    "empirical_sigma2",
    "estimate_mean",
    "frobenius_norm_sq",
    "generate_dataset",
    "GpModel",
    "GpParams",
    "histogram",
    "hpd",
    "HpdInterval",
    "JointPosterior",
    "log_likelihood",
    "log_likelihood_augmented",
    "log_posterior_joint",
    "log_posterior_predictive",
    "log_posterior_training",
    "log_prior",
    "make_polar_grid",
    "mode_estimate",
    "mode_product",
    "omega_bar",
    "PARAM_NAMES",
    "ParamVector",
    "pilot_tune",
    "PredictivePosterior",
    "PriorSpec",
    "propose",
    "run_chain",
    "Scheme",
    "Sigma3Params",
    "slice_tensor",
    "SpdMatrix",
    "SqeKernelParams",
    "subtract",
    "Trace",
    "TrainingPosterior",
    "UnitConstants",
    "vectorize",
    "whiten",
]
