"""Build script for the optional compiled kernels.

The extension is marked optional: if Cython or a C compiler is missing the
package still installs and falls back to the numpy kernels at import time.
"""
from setuptools import setup, Extension

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "flagflow._kernels",
                ["src/flagflow/_kernels.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )

setup(ext_modules=ext_modules)
