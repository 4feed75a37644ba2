import numpy as np
from setuptools import setup, Extension

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "siqkd._kernel._deadtime_cy",
                ["src/siqkd/_kernel/_deadtime_cy.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    # No Cython available: install without the compiled kernel, the pure
    # Python fallback is selected at import time.
    ext_modules = []

setup(ext_modules=ext_modules)
