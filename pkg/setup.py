import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("UNICYCLE_ESC_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:  # fall back to the pure-Python kernels
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "unicycle_esc._kernels",
                    ["src/unicycle_esc/_kernels.pyx"],
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                    libraries=["m"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
