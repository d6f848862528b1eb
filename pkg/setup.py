"""Build script for the compiled Monte Carlo kernels.

The package works without the extension; ``uwqkd.montecarlo`` falls back to
the numpy implementation when ``_kernels`` cannot be imported.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "uwqkd.montecarlo._kernels",
                ["src/uwqkd/montecarlo/_kernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
