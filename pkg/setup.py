"""Build script for the optional compiled chain kernels.

The package is fully functional without the extension (a pure-Python twin of
every kernel is selected at import time); building it just makes long chain
runs roughly two orders of magnitude faster.
"""

from setuptools import Extension, setup

import numpy as np
from Cython.Build import cythonize

ext = Extension(
    "polarslice._chain",
    ["src/polarslice/_chain.pyx"],
    include_dirs=[np.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)

setup(ext_modules=cythonize([ext], language_level="3"))
