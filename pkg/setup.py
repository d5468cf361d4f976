"""Build script for the optional compiled kernel.

The package is pure Python plus one Cython extension; if Cython or a C
compiler is unavailable the extension is skipped and the numpy fallback
is used at runtime.
"""

from setuptools import setup
from setuptools.extension import Extension

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("fdgcl.kernels._fast", ["src/fdgcl/kernels/_fast.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
