"""Dense rank-k tensors and the multilinear operations on them.

Layout contract: the flat representation of a tensor varies the mode-1
index fastest (Fortran order). Under this layout

    vec(t x_1 A_1 ... x_k A_k) = (A_k kron ... kron A_1) vec(t),

which fixes the Kronecker ordering used everywhere else in the package.

Modes are addressed with 0-based ``axis`` integers, as in numpy.
"""

from __future__ import annotations

from math import prod
from typing import Sequence

import numpy as np

from tvgp import _kernels
from tvgp.errors import ShapeError

__all__ = [
    "DenseTensor",
    "as_tensor",
    "mode_product",
    "frobenius_norm_sq",
    "vectorize",
    "devectorize",
    "subtract",
    "slice_tensor",
    "stack",
]


class DenseTensor:
    """Immutable dense tensor of real values.

    Parameters
    ----------
    array : array_like
        Values indexed as ``array[i1, ..., ik]``. Copied on construction.
    """

    __slots__ = ("_array",)

    def __init__(self, array):
        arr = np.array(array, dtype=np.float64, order="F", copy=True)
        if arr.ndim < 1:
            raise ShapeError("a tensor needs rank >= 1")
        if any(m < 1 for m in arr.shape):
            raise ShapeError(f"all dims must be >= 1, got {arr.shape}")
        arr.flags.writeable = False
        self._array = arr

    @classmethod
    def from_flat(cls, data, dims: Sequence[int]) -> DenseTensor:
        """Build from a flat vector in mode-1-fastest order."""
        data = np.asarray(data, dtype=np.float64).ravel()
        dims = tuple(int(m) for m in dims)
        if len(data) != prod(dims):
            raise ShapeError(
                f"data length {len(data)} does not match dims {dims} "
                f"(product {prod(dims)})"
            )
        return cls(data.reshape(dims, order="F"))

    @classmethod
    def zeros(cls, dims: Sequence[int]) -> DenseTensor:
        return cls(np.zeros(tuple(dims)))

    @property
    def dims(self) -> tuple[int, ...]:
        return self._array.shape

    @property
    def rank(self) -> int:
        return self._array.ndim

    @property
    def size(self) -> int:
        return self._array.size

    @property
    def array(self) -> np.ndarray:
        """Read-only ndarray view of the values."""
        return self._array

    @property
    def data(self) -> np.ndarray:
        """Flat values in mode-1-fastest order."""
        return self._array.ravel(order="F")

    def get(self, *index: int) -> float:
        return float(self._array[index])

    def with_value(self, index: tuple[int, ...], value: float) -> DenseTensor:
        """Return a copy with one entry replaced."""
        arr = self._array.copy(order="F")
        arr[index] = value
        return DenseTensor(arr)

    def __eq__(self, other):
        if not isinstance(other, DenseTensor):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self._array, other._array)

    def __hash__(self):
        return hash((self.dims, self._array.tobytes(order="F")))

    def __repr__(self):
        return f"DenseTensor(dims={self.dims})"


def as_tensor(t) -> DenseTensor:
    return t if isinstance(t, DenseTensor) else DenseTensor(t)


def _three_way(arr: np.ndarray, axis: int) -> np.ndarray:
    # (left, m_axis, right) view; valid because storage is Fortran-ordered
    left = prod(arr.shape[:axis])
    right = prod(arr.shape[axis + 1:])
    return arr.reshape((left, arr.shape[axis], right), order="F")


def _check_axis(t: DenseTensor, axis: int) -> None:
    if not 0 <= axis < t.rank:
        raise ShapeError(f"mode {axis} out of range for rank-{t.rank} tensor")


def mode_product(t: DenseTensor, mat, axis: int) -> DenseTensor:
    """Mode-``axis`` product ``t x_axis mat``.

    ``result[..., a, ...] = sum_j mat[a, j] * t[..., j, ...]`` with the
    summed index sitting at position ``axis``.
    """
    t = as_tensor(t)
    _check_axis(t, axis)
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2:
        raise ShapeError(f"mode {axis}: expected a matrix, got ndim={mat.ndim}")
    if mat.shape[1] != t.dims[axis]:
        raise ShapeError(
            f"mode {axis}: matrix has {mat.shape[1]} columns but tensor "
            f"dimension is {t.dims[axis]}"
        )
    out3 = _kernels.mode_product3(_three_way(t.array, axis), mat)
    dims = list(t.dims)
    dims[axis] = mat.shape[0]
    return DenseTensor(out3.reshape(dims, order="F"))


def frobenius_norm_sq(t: DenseTensor) -> float:
    arr = as_tensor(t).array
    return float(np.dot(arr.ravel(order="K"), arr.ravel(order="K")))


def vectorize(t: DenseTensor) -> np.ndarray:
    """Flat copy in mode-1-fastest order."""
    return as_tensor(t).array.flatten(order="F")


def devectorize(vec, dims: Sequence[int]) -> DenseTensor:
    return DenseTensor.from_flat(vec, dims)


def subtract(a: DenseTensor, b: DenseTensor) -> DenseTensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.dims != b.dims:
        raise ShapeError(f"cannot subtract tensors of dims {a.dims} and {b.dims}")
    return DenseTensor(a.array - b.array)


def slice_tensor(t: DenseTensor, axis: int, index: int):
    """Fix mode ``axis`` at ``index``.

    Returns a rank k-1 tensor, or a float when ``t`` has rank 1.
    """
    t = as_tensor(t)
    _check_axis(t, axis)
    if not 0 <= index < t.dims[axis]:
        raise IndexError(
            f"index {index} out of range for mode {axis} of size {t.dims[axis]}"
        )
    sub = np.take(t.array, index, axis=axis)
    if t.rank == 1:
        return float(sub)
    return DenseTensor(sub)


def stack(slices: Sequence[DenseTensor], axis: int) -> DenseTensor:
    """Inverse of slicing: stack rank k-1 tensors along a new mode ``axis``."""
    arrays = [
        s.array if isinstance(s, DenseTensor) else np.asarray(s, dtype=np.float64)
        for s in slices
    ]
    if not arrays:
        raise ShapeError("nothing to stack")
    if len({a.shape for a in arrays}) != 1:
        raise ShapeError("all slices must share dims")
    return DenseTensor(np.stack(arrays, axis=axis))
