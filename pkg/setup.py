"""Build script: compiles the optional Cython kernel extension.

If Cython (or a C compiler) is unavailable the package still installs;
`fiberdyn._kernels` falls back to the pure-numpy implementation at import.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    import numpy as np
    from setuptools import Extension

    ext = Extension(
        "fiberdyn._kernels._native",
        ["src/fiberdyn/_kernels/_native.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext_modules = cythonize([ext], language_level=3)
except ImportError:
    pass

setup(ext_modules=ext_modules)
