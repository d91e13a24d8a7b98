import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

ext = Extension(
    "graysl._native",
    ["src/graysl/_native.pyx"],
    include_dirs=[np.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)

setup(
    # src layout spelled out for legacy setup.py code paths; pyproject.toml
    # carries the rest of the metadata
    package_dir={"": "src"},
    packages=["graysl"],
    ext_modules=cythonize(
        [ext],
        compiler_directives={"language_level": "3"},
    ),
)
