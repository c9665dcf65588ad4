"""Build the optional compiled kernels; the package works without them."""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("routinevis._ckernels", ["src/routinevis/_ckernels.pyx"], optional=True)],
        compiler_directives={"language_level": "3"},
        quiet=True,
    )
except ImportError:  # no Cython: pure-Python kernels only
    pass

setup(ext_modules=ext_modules)
