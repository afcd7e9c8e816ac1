"""Build hook for the optional compiled kernel.

The package is fully functional without the extension (a pure-Python
backend is selected at import time); the extension exists because the
Monte Carlo harness spends nearly all its time in the per-sample
synth/decode loops.  Two build details keep the C kernel bit-identical
to the pure backend:

  - -ffp-contract=off: no FMA contraction the interpreter doesn't use
  - linking numpy's npyrandom static library, so the kernel draws from
    the same PCG64 stream through the same distribution code
"""

import os

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    random_lib = os.path.abspath(
        os.path.join(numpy.get_include(), "..", "..", "random", "lib")
    )
    ext_modules = cythonize(
        [
            Extension(
                "gazemark._kernel.native",
                ["src/gazemark/_kernel/native.pyx"],
                include_dirs=[numpy.get_include()],
                library_dirs=[random_lib],
                libraries=["npyrandom"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except ImportError:
    # No Cython/numpy at build time: ship pure-Python only.
    pass

setup(ext_modules=ext_modules)
