"""Build script: compiles the optional grid-evaluation extension.

The package is fully functional without the extension (a NumPy fallback is
selected at import time), so any build failure here downgrades to a pure
install instead of aborting.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "weylamp._kernels._core",
                ["src/weylamp/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"weylamp: skipping compiled kernels ({exc}); using NumPy fallback")

setup(ext_modules=ext_modules)
