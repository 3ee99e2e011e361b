import numpy
from setuptools import Extension, setup

# The compiled kernels are an optional speedup: geoclust.backend falls back to
# the numpy implementation when geoclust._core is missing.
try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "geoclust._core",
                ["src/geoclust/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
