"""Build the optional compiled kernels; the package works without them."""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
    ext_modules = cythonize(
        [Extension(
            "inexact_pg._kernels._dykstra_cy",
            ["src/inexact_pg/_kernels/_dykstra_cy.pyx"],
            extra_compile_args=["-O3"],
        )],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
