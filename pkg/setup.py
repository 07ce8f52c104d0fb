from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    # Pure-Python install: geomed falls back to the numpy kernels at import.
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "geomed._speedups",
                sources=["src/geomed/_speedups.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
