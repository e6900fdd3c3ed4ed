"""Mean-tensor estimation and tensor-normal log-likelihoods.

For a rank-k residual ``R`` with per-mode covariances ``Sigma_i`` of order
``m_i`` and ``m = prod(m_i)``::

    log l = -m/2 log(2 pi) - sum_i m/(2 m_i) log|Sigma_i| - ||R x_1 A_1^-1 ... x_k A_k^-1||^2 / 2

which equals the multivariate normal log-density of ``vec(R)`` with
covariance ``Sigma_k kron ... kron Sigma_1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from tvgp.covariance import (
    DEFAULT_JITTER,
    Sigma3Params,
    SpdMatrix,
    SqeKernelParams,
    build_sigma3,
    build_sqe_matrix,
    empirical_sigma2,
    whiten_array,
)
from tvgp.errors import NumericalError, ShapeError
from tvgp.tensor import DenseTensor, as_tensor

LOG_2PI = math.log(2.0 * math.pi)


def estimate_mean(d: DenseTensor) -> DenseTensor:
    """Average over the mode-1 replicates, broadcast back along mode 1."""
    arr = as_tensor(d).array
    return DenseTensor(np.broadcast_to(arr.mean(axis=0, keepdims=True), arr.shape))


@dataclass(frozen=True)
class GpModel:
    mean: DenseTensor
    sigma1: SpdMatrix
    sigma2: SpdMatrix
    sigma3: SpdMatrix

    @property
    def factors(self) -> tuple[SpdMatrix, SpdMatrix, SpdMatrix]:
        return (self.sigma1, self.sigma2, self.sigma3)

    @property
    def m_total(self) -> int:
        return self.sigma1.n * self.sigma2.n * self.sigma3.n


def tensor_normal_logpdf(residual: np.ndarray, factors: Sequence[SpdMatrix]) -> float:
    """Zero-mean tensor-normal log-density of a residual array."""
    if len(factors) != residual.ndim:
        raise ShapeError(f"{len(factors)} factors for a rank-{residual.ndim} tensor")
    for axis, f in enumerate(factors):
        if f.n != residual.shape[axis]:
            raise ShapeError(
                f"mode {axis}: covariance order {f.n} but data dimension "
                f"{residual.shape[axis]}"
            )
    m = residual.size
    det_term = 0.5 * sum(m / f.n * f.logdet for f in factors)
    w = whiten_array(residual, factors)
    quad = float(np.dot(w.ravel(order="K"), w.ravel(order="K")))
    value = -0.5 * m * LOG_2PI - det_term - 0.5 * quad
    if not math.isfinite(value):
        term = "log-determinant" if not math.isfinite(det_term) else "quadratic form"
        raise NumericalError(f"non-finite log-likelihood in the {term}", term=term)
    return value


def log_likelihood(d: DenseTensor, model: GpModel) -> float:
    d = as_tensor(d)
    if d.dims != model.mean.dims:
        raise ShapeError(f"data dims {d.dims} do not match model mean {model.mean.dims}")
    return tensor_normal_logpdf(d.array - model.mean.array, model.factors)


class PreparedData:
    """Data-dependent pieces held fixed during a chain.

    Holds the centred residual and the factorized empirical mode-2
    covariance of a rank-3 tensor; both are computed once.
    """

    def __init__(self, d: DenseTensor, jitter: float = DEFAULT_JITTER):
        d = as_tensor(d)
        if d.rank != 3:
            raise ShapeError(f"expected a rank-3 tensor, got rank {d.rank}")
        self.data = d
        self.mean = estimate_mean(d)
        self.residual = np.asfortranarray(d.array - self.mean.array)
        self.sigma2 = empirical_sigma2(d, jitter)
        self.jitter = jitter

    @property
    def dims(self) -> tuple[int, ...]:
        return self.data.dims

    def loglik(self, sigma1: SpdMatrix, sigma3: SpdMatrix) -> float:
        return tensor_normal_logpdf(self.residual, (sigma1, self.sigma2, sigma3))


def augmented_points(design, s_test) -> np.ndarray:
    """Design points with ``s_test`` appended as the last row."""
    design = np.atleast_2d(np.asarray(design, dtype=np.float64))
    s_test = np.asarray(s_test, dtype=np.float64).reshape(1, -1)
    if s_test.shape[1] != design.shape[1]:
        raise ShapeError(
            f"s_test has dimension {s_test.shape[1]}, design points {design.shape[1]}"
        )
    return np.vstack([design, s_test])


def log_likelihood_augmented(
    d_star: DenseTensor,
    s_test,
    design,
    kernel: SqeKernelParams,
    sigma3p: Sigma3Params,
    jitter: float = DEFAULT_JITTER,
    prepared: PreparedData | None = None,
) -> float:
    """Log-likelihood of training data augmented by one test slice.

    The test slice is the last mode-1 slice of ``d_star`` and is located at
    the unknown input ``s_test``. Pass ``prepared`` to reuse the mean and
    empirical mode-2 covariance of ``d_star`` across calls.
    """
    if prepared is None:
        prepared = PreparedData(d_star, jitter)
    pts = augmented_points(design, s_test)
    if pts.shape[0] != prepared.dims[0]:
        raise ShapeError(
            f"{pts.shape[0] - 1} design points + s_test but the augmented "
            f"tensor has {prepared.dims[0]} mode-1 slices"
        )
    sigma1 = build_sqe_matrix(pts, kernel, jitter)
    sigma3 = build_sigma3(sigma3p, jitter)
    return prepared.loglik(sigma1, sigma3)
