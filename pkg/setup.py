"""Optional compiled core for the SMO solver.

The package is pure Python by default.  When Cython and a C compiler are
available, ``python setup.py build_ext --inplace`` (or a normal pip build in
an environment that has Cython) compiles ``attrforge._smo_cy``, which the
solver picks up automatically at import.  Set ``ATTRFORGE_NO_EXT=1`` to skip
the extension entirely.

The extension is compiled with -ffp-contract=off so that compiled and pure
backends produce bit-identical models.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("ATTRFORGE_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools.extension import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "attrforge._smo_cy",
                    ["src/attrforge/_smo_cy.pyx"],
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
