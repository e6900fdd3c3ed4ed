"""Per-mode covariance matrices: SQE-kernel, empirical and direct 2x2.

Every matrix passes through :meth:`SpdMatrix.factorize`, which adds a
relative diagonal jitter and caches the lower Cholesky factor and the
log-determinant. Inverses are never formed; :func:`whiten` works through
triangular solves.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import lapack, solve_triangular

from tvgp import _kernels
from tvgp.errors import DomainError, FactorizationError, ShapeError
from tvgp.tensor import DenseTensor, _three_way, as_tensor

DEFAULT_JITTER = 1e-8


@dataclass(frozen=True)
class SqeKernelParams:
    """Diagonal of the inverse squared length-scale matrix Q.

    The global kernel amplitude is fixed to one; overall scale is carried
    by the directly parametrised 2x2 matrix.
    """

    q_diag: tuple[float, ...]

    def __post_init__(self):
        q = tuple(float(v) for v in np.atleast_1d(self.q_diag))
        if not q or not all(v > 0 and np.isfinite(v) for v in q):
            raise DomainError(f"q_diag entries must be finite and > 0, got {q}")
        object.__setattr__(self, "q_diag", q)


@dataclass(frozen=True)
class Sigma3Params:
    sigma11: float
    sigma22: float
    rho: float

    def matrix(self) -> np.ndarray:
        off = self.rho * np.sqrt(self.sigma11 * self.sigma22)
        return np.array([[self.sigma11, off], [off, self.sigma22]])


class SpdMatrix:
    """Factorized symmetric positive definite matrix.

    Attributes
    ----------
    entries : ndarray
        The matrix that was factorized, jitter included.
    chol : ndarray
        Lower-triangular factor with ``chol @ chol.T == entries``.
    logdet : float
        ``2 * sum(log(diag(chol)))``.
    jitter : float
        Absolute amount added to the diagonal.
    """

    __slots__ = ("entries", "chol", "logdet", "jitter")

    def __init__(self, entries, chol, logdet, jitter=0.0):
        self.entries = entries
        self.chol = chol
        self.logdet = logdet
        self.jitter = jitter

    @classmethod
    def factorize(cls, matrix, jitter: float = DEFAULT_JITTER) -> SpdMatrix:
        """Symmetrize, add ``jitter * mean(diag)`` to the diagonal, factorize.

        Raises
        ------
        FactorizationError
            If a Cholesky pivot is not positive.
        """
        a = np.array(matrix, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ShapeError(f"expected a square matrix, got shape {a.shape}")
        scale = np.max(np.abs(a)) if a.size else 0.0
        if scale > 0 and np.max(np.abs(a - a.T)) > 1e-10 * scale:
            raise DomainError("matrix is not symmetric")
        a = 0.5 * (a + a.T)
        mean_diag = float(np.mean(np.diag(a)))
        eps = jitter * mean_diag if mean_diag > 0 else 0.0
        if eps:
            a[np.diag_indices_from(a)] += eps
        chol, info = lapack.dpotrf(a, lower=1, clean=1)
        if info != 0:
            if info < 0:
                raise FactorizationError(f"dpotrf argument {-info} invalid")
            raise FactorizationError(
                f"matrix of order {a.shape[0]} is not positive definite: "
                f"pivot {info} is not positive (jitter {eps:.3g})",
                pivot=int(info),
            )
        logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
        a.flags.writeable = False
        chol.flags.writeable = False
        return cls(a, chol, logdet, eps)

    @classmethod
    def identity(cls, n: int) -> SpdMatrix:
        eye = np.eye(n)
        eye.flags.writeable = False
        return cls(eye, eye, 0.0, 0.0)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def raw(self) -> np.ndarray:
        """The matrix before jitter."""
        return self.entries - self.jitter * np.eye(self.n)

    def solve_lower(self, b) -> np.ndarray:
        """``chol^{-1} b``."""
        return solve_triangular(self.chol, b, lower=True, check_finite=False)

    def __repr__(self):
        return f"SpdMatrix(n={self.n}, logdet={self.logdet:.6g})"


def build_sqe_matrix(
    points, params: SqeKernelParams, jitter: float = DEFAULT_JITTER
) -> SpdMatrix:
    """SQE correlation matrix over a list of d-dimensional points.

    ``K[j, p] = exp(-sum_a q[a] * (s_j[a] - s_p[a])**2)``, unit diagonal
    before jitter.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.shape[0] < 1:
        raise ShapeError("need at least one design point")
    if pts.shape[1] != len(params.q_diag):
        raise ShapeError(
            f"points have dimension {pts.shape[1]} but q_diag has "
            f"{len(params.q_diag)} entries"
        )
    return SpdMatrix.factorize(_kernels.sqe_gram(pts, params.q_diag), jitter)


def empirical_sigma2_matrix(d) -> np.ndarray:
    """Unfactorized mode-2 covariance estimate of an m1 x m2 x m3 tensor."""
    arr = as_tensor(d).array
    if arr.ndim != 3:
        raise ShapeError(f"expected a rank-3 tensor, got rank {arr.ndim}")
    if arr.shape[2] < 2:
        raise DomainError(f"need m3 >= 2 for the 1/(m3-1) factor, got {arr.shape[2]}")
    return _kernels.empirical_cov(arr)


def empirical_sigma2(d, jitter: float = DEFAULT_JITTER) -> SpdMatrix:
    return SpdMatrix.factorize(empirical_sigma2_matrix(d), jitter)


def build_sigma3(p: Sigma3Params, jitter: float = DEFAULT_JITTER) -> SpdMatrix:
    if not (p.sigma11 > 0 and p.sigma22 > 0):
        raise DomainError(
            f"diagonal entries must be positive, got {p.sigma11}, {p.sigma22}"
        )
    if not abs(p.rho) < 1:
        raise DomainError(f"correlation must lie in (-1, 1), got {p.rho}")
    return SpdMatrix.factorize(p.matrix(), jitter)


def whiten_array(arr: np.ndarray, factors: Sequence[SpdMatrix]) -> np.ndarray:
    """Apply ``chol_p^{-1}`` along every mode p of a Fortran-ordered array."""
    if len(factors) != arr.ndim:
        raise ShapeError(f"{len(factors)} factors for a rank-{arr.ndim} tensor")
    out = arr
    for axis, f in enumerate(factors):
        m = out.shape[axis]
        if f.n != m:
            raise ShapeError(f"mode {axis}: factor order {f.n} but tensor dimension {m}")
        t3 = _three_way(out, axis)
        left, _, right = t3.shape
        flat = t3.transpose(1, 0, 2).reshape(m, left * right)
        solved = f.solve_lower(flat)
        t3 = solved.reshape(m, left, right).transpose(1, 0, 2)
        out = np.asfortranarray(t3).reshape(out.shape, order="F")
    return out


def whiten(t: DenseTensor, factors: Sequence[SpdMatrix]) -> DenseTensor:
    """``t x_1 A_1^{-1} ... x_k A_k^{-1}`` with ``A_p`` the Cholesky factors."""
    return DenseTensor(whiten_array(as_tensor(t).array, factors))
