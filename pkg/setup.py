"""Builds the optional compiled MSO kernel; the package works without it."""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("HYPERCLOCK_PURE_PYTHON") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:  # pragma: no cover
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            ["src/hyperclock/mso/_kernel_c.pyx"],
            compiler_directives={"language_level": "3"},
            quiet=True,
        )

setup(ext_modules=ext_modules)
