import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("THOUGHTPROP_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("thoughtprop._ckernels", ["src/thoughtprop/_ckernels.pyx"])],
            compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
        )

setup(ext_modules=ext_modules)
