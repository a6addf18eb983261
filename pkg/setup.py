"""Build script: compiles the optional decoding kernels.

The package is pure Python plus one optional Cython extension holding the
two decode-time hot loops (Eisner spans, Viterbi trellis).  Set
SYLPARSE_PURE=1 in the environment to skip compilation; the package then
falls back to the numpy implementations at import time.
"""

import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - build environment without Cython
    cythonize = None

extensions = []
if cythonize is not None and not os.environ.get("SYLPARSE_PURE"):
    extensions = cythonize(
        [
            Extension(
                "sylparse.kernels._speedups",
                ["src/sylparse/kernels/_speedups.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=extensions)
