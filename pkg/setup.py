import os
import sys

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; the numpy kernels take over at import
    cythonize = None

# -ffp-contract=off keeps a*b+c as two roundings so the compiled and numpy
# kernels agree bit for bit.
compile_args = ["-O3", "-ffp-contract=off"]
link_args = []
if sys.platform.startswith("linux") and not os.environ.get("CRLM_NO_OPENMP"):
    compile_args.append("-fopenmp")
    link_args.append("-fopenmp")
if os.environ.get("CRLM_NATIVE", "1") == "1":
    compile_args.append("-march=native")

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "crlm._kernels",
                ["src/crlm/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=compile_args,
                extra_link_args=link_args,
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
