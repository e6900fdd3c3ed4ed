"""numpy implementations of the hot kernels.

Reference versions; ``_ckernels.pyx`` mirrors these signatures.
"""

import numpy as np


def sqe_gram(points, q):
    """Unit-amplitude squared-exponential Gram matrix.

    ``K[j, p] = exp(-sum_a q[a] * (points[j, a] - points[p, a])**2)``.
    """
    points = np.asarray(points, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    diff = points[:, None, :] - points[None, :, :]
    K = np.exp(-np.einsum("jpa,a->jp", diff * diff, q))
    np.fill_diagonal(K, 1.0)
    return K


def mode_product3(t3, mat):
    """``out[l, a, r] = sum_j mat[a, j] * t3[l, j, r]``."""
    out = np.einsum("aj,ljr->lar", mat, t3, optimize=True)
    return np.asfortranarray(out)


def empirical_cov(d):
    """Mode-2 covariance estimate from a m1 x m2 x m3 array.

    Each mode-2 slice is centred over mode 1 per mode-3 column; the
    cross-products are averaged over mode 1 (1/m1) and summed over mode 3
    with a 1/(m3 - 1) factor.
    """
    d = np.asarray(d, dtype=np.float64)
    m1, _, m3 = d.shape
    r = d - d.mean(axis=0, keepdims=True)
    e = np.einsum("sbt,sct->bc", r, r, optimize=True) / (m1 * (m3 - 1))
    return 0.5 * (e + e.T)


def hpd_window(sorted_samples, w):
    """Start index of the narrowest window of ``w`` consecutive values.

    Ties resolve to the earliest window.
    """
    x = np.asarray(sorted_samples, dtype=np.float64)
    widths = x[w - 1:] - x[: len(x) - w + 1]
    return int(np.argmin(widths))
