"""Build the optional Cython kernels.

Setting ``LMPROJ_NO_EXT=1`` skips compilation; the package then runs on the
numpy fallback in ``lmproj._local_py``.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("LMPROJ_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "lmproj._local_ext",
                    ["src/lmproj/_local_ext.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
