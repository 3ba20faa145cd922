from setuptools import setup

ext_modules = []
try:
    from setuptools import Extension

    from Cython.Build import cythonize

    ext = Extension(
        "wavebroker._kernel._placement",
        ["src/wavebroker/_kernel/_placement.pyx"],
    )
    # The extension is a fast path only; the pure-Python kernel is always
    # available, so a failed native build must not fail the install.
    ext.optional = True
    ext_modules = cythonize([ext], compiler_directives={"language_level": "3"})
except ImportError:
    pass

setup(ext_modules=ext_modules)
