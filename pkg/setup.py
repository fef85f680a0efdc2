"""Build shim for the optional Cython kernel extension.

The package works without the extension (a numpy fallback is selected at
import time), so a missing compiler or Cython only costs speed, not
functionality.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "survmatch._kernels._speedups",
                sources=["src/survmatch/_kernels/_speedups.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    import warnings

    warnings.warn("Cython/numpy unavailable at build time; building without the compiled kernels")

setup(ext_modules=ext_modules)
