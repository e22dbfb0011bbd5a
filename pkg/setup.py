"""Build script: compiles the simulation kernel when Cython and a C
compiler are available, otherwise the package falls back to the pure
Python kernel at import time."""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("ENCIRCLE_PURE_PYTHON") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "encircle._core",
                    ["src/encircle/_core.pyx"],
                    # -ffp-contract=off: keep IEEE semantics so the compiled
                    # kernel stays bitwise identical to the pure Python one.
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
