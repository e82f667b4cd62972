"""Build script for the optional compiled kernel extension.

The package works without the extension: pure numpy kernels are selected
at import time when ``delaykf._core`` is missing. Building it just makes
the per-tick filter arithmetic faster (see benchmarks/bench_backends.py).
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "delaykf._core",
                ["src/delaykf/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=extensions)
