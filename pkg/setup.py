# Builds the optional compiled kernels. The package works without them
# (pure numpy fallback in sarhawk.kernels), so a failed compile is not fatal:
# install with SARHAWK_SKIP_EXT=1 to skip the extension entirely.
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("SARHAWK_SKIP_EXT"):
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/sarhawk/kernels/_fast.pyx"],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
    for ext in ext_modules:
        ext.include_dirs.append(numpy.get_include())
        ext.extra_compile_args = ["-O3"]

setup(ext_modules=ext_modules)
