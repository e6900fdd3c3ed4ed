"""Synthetic tensor-normal data for recovery tests."""

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
)
from tvgp.errors import DomainError, ShapeError
from tvgp.tensor import DenseTensor, as_tensor, mode_product

DEFAULT_R_RANGE = (1.7, 2.3)
DEFAULT_PHI_RANGE = (0.0, math.pi / 2)


@dataclass(frozen=True)
class GpParams:
    q11: float
    q22: float
    sigma11: float
    sigma22: float
    rho: float

    def as_dict(self) -> dict[str, float]:
        return {
            "q11": self.q11,
            "q22": self.q22,
            "sigma11": self.sigma11,
            "sigma22": self.sigma22,
            "rho": self.rho,
        }


def colorize(z: DenseTensor, mean: DenseTensor | None, factors: Sequence[SpdMatrix]) -> DenseTensor:
    """``mean + z x_1 A_1 ... x_k A_k`` with ``A_p`` the Cholesky factors."""
    z = as_tensor(z)
    if len(factors) != z.rank:
        raise ShapeError(f"{len(factors)} factors for a rank-{z.rank} tensor")
    out = z
    for axis, f in enumerate(factors):
        if f.n != z.dims[axis]:
            raise ShapeError(f"mode {axis}: factor order {f.n} but tensor dimension {z.dims[axis]}")
        out = mode_product(out, f.chol, axis)
    if mean is None:
        return out
    mean = as_tensor(mean)
    if mean.dims != out.dims:
        raise ShapeError(f"mean dims {mean.dims} differ from {out.dims}")
    return DenseTensor(out.array + mean.array)


def make_polar_grid(
    n_r: int,
    n_phi: int,
    r_range: tuple[float, float] = DEFAULT_R_RANGE,
    phi_range: tuple[float, float] = DEFAULT_PHI_RANGE,
) -> np.ndarray:
    """Cell midpoints of a regular (r, phi) grid, r varying slowest.

    Returns an ``(n_r * n_phi, 2)`` array of ``(s1, s2)`` rows.
    """
    if n_r < 1 or n_phi < 1:
        raise DomainError(f"empty grid ({n_r} x {n_phi})")
    r_edges = np.linspace(r_range[0], r_range[1], n_r + 1)
    p_edges = np.linspace(phi_range[0], phi_range[1], n_phi + 1)
    r_mid = 0.5 * (r_edges[:-1] + r_edges[1:])
    p_mid = 0.5 * (p_edges[:-1] + p_edges[1:])
    rr, pp = np.meshgrid(r_mid, p_mid, indexing="ij")
    return np.column_stack([rr.ravel(), pp.ravel()])


def ar1_correlation(n: int, phi: float = 0.5) -> np.ndarray:
    idx = np.arange(n)
    return phi ** np.abs(idx[:, None] - idx[None, :])


@dataclass(frozen=True)
class SyntheticDataset:
    training: DenseTensor
    test_slice: DenseTensor
    s_test: np.ndarray
    design: np.ndarray
    truth: GpParams

    @property
    def augmented(self) -> DenseTensor:
        """Training tensor with the test slice appended along mode 1."""
        return DenseTensor(
            np.concatenate([self.training.array, self.test_slice.array[None]], axis=0)
        )


def generate_dataset(
    grid,
    true_params: GpParams,
    m2: int,
    m3: int = 2,
    seed: int = 0,
    s_test=None,
    r_range: tuple[float, float] = DEFAULT_R_RANGE,
    phi_range: tuple[float, float] = DEFAULT_PHI_RANGE,
    jitter: float = DEFAULT_JITTER,
) -> SyntheticDataset:
    """One zero-mean tensor-normal draw over ``grid`` plus a test point.

    ``s_test`` is drawn uniformly in ``r_range x phi_range`` unless given.
    The mode-2 covariance is the AR(1) correlation ``0.5**|b - c|``.
    """
    grid = np.atleast_2d(np.asarray(grid, dtype=np.float64))
    if grid.shape[0] < 1:
        raise DomainError("grid is empty")
    if m3 != 2:
        raise ShapeError(f"the mode-3 covariance is 2x2, so m3 must be 2 (got {m3})")
    if m2 < 1:
        raise DomainError(f"m2 must be >= 1, got {m2}")
    rng = np.random.default_rng(seed)
    if s_test is None:
        s_test = np.array([rng.uniform(*r_range), rng.uniform(*phi_range)])
    s_test = np.asarray(s_test, dtype=np.float64).reshape(2)
    points = np.vstack([grid, s_test])
    sigma1 = build_sqe_matrix(points, SqeKernelParams((true_params.q11, true_params.q22)), jitter)
    sigma2 = SpdMatrix.factorize(ar1_correlation(m2), jitter)
    sigma3 = build_sigma3(
        Sigma3Params(true_params.sigma11, true_params.sigma22, true_params.rho), jitter
    )
    z = DenseTensor(rng.standard_normal((points.shape[0], m2, m3)))
    full = colorize(z, None, (sigma1, sigma2, sigma3)).array
    return SyntheticDataset(
        training=DenseTensor(full[:-1]),
        test_slice=DenseTensor(full[-1]),
        s_test=s_test,
        design=grid,
        truth=true_params,
    )
