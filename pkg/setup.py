"""Build script for the optional compiled kernels.

The package is fully functional without the extension; ``tvgp._kernels``
falls back to the numpy implementations when ``tvgp._ckernels`` cannot be
imported.
"""

import os
import sys

from setuptools import setup
from setuptools.extension import Extension

try:
    import numpy as np
    from Cython.Build import cythonize
    CYTHON = True
except ImportError as err:
    print(f"Building without compiled kernels: {err}", file=sys.stderr)
    CYTHON = False

ext_modules = []
if CYTHON and not os.environ.get("TVGP_NO_EXTENSION"):
    ext_modules = cythonize(
        [
            Extension(
                "tvgp._ckernels",
                [os.path.join("src", "tvgp", "_ckernels.pyx")],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
