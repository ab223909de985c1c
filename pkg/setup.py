"""Build script for the compiled simulation kernel.

The hot loop lives in a Cython extension linked against numpy's C random
distribution library. If the extension fails to build or import, the package
still works through the pure-Python kernel in banditlab.engine._pure.
"""

import os

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

numpy_random_lib = os.path.join(os.path.dirname(numpy.random.__file__), "lib")

extensions = [
    Extension(
        "banditlab.engine._kernels",
        ["src/banditlab/engine/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        library_dirs=[numpy_random_lib],
        libraries=["npyrandom"],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
