import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; psimt.kernels falls back to numpy
    cythonize = None

compile_args = ["-O3", "-fopenmp"]
if os.environ.get("PSIMT_NATIVE", "1") == "1":
    compile_args.append("-march=native")

ext_modules = []
if cythonize is not None and os.environ.get("PSIMT_NO_EXT") != "1":
    ext_modules = cythonize(
        [
            Extension(
                f"psimt._ext.{name}",
                [f"src/psimt/_ext/{name}.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=compile_args,
                extra_link_args=["-fopenmp"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
            for name in ("coulomb", "closest")
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
