"""Kernel dispatch: compiled extension when importable, numpy otherwise.

Set ``TVGP_PURE_PYTHON=1`` before import to force the numpy kernels.
"""

import os

from tvgp import _pykernels

BACKEND = "python"

if not os.environ.get("TVGP_PURE_PYTHON"):
    try:
        from tvgp import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

sqe_gram = _impl.sqe_gram
mode_product3 = _impl.mode_product3
empirical_cov = _impl.empirical_cov
hpd_window = _impl.hpd_window
