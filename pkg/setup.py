import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

setup(
    ext_modules=cythonize(
        [Extension("mehler_sos._ckernels", ["src/mehler_sos/_ckernels.pyx"], include_dirs=[np.get_include()])],
        language_level=3,
    ),
)
