"""Build the optional Cython geodesic kernel.

If Cython or a C compiler is unavailable the package still installs and
falls back to the pure-Python integrator at import time.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("EQGEOM_NO_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("eqgeom._kernels", ["src/eqgeom/_kernels.pyx"],
                       extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
