import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    USE_CYTHON = True
except ImportError:
    USE_CYTHON = False

# The compiled kernels are optional; the package falls back to numpy.
if os.environ.get("SCHUR_INTERP_NO_EXT"):
    USE_CYTHON = False

EXTENSIONS = []
if USE_CYTHON:
    EXTENSIONS = cythonize(
        [
            Extension(
                "schur_interp._ckernels",
                ["src/schur_interp/_ckernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=EXTENSIONS)
