"""Build script for the optional compiled kernel extension.

The package works without the extension (a pure-NumPy backend is selected at
import time), so the build degrades gracefully when Cython or a C compiler is
unavailable. Build in place for development with::

    python setup.py build_ext --inplace
"""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


def _skip(reason):
    sys.stderr.write(
        f"gradstop: building without compiled kernels ({reason}); "
        "the pure-Python backend will be used\n"
    )


class OptionalBuildExt(build_ext):
    """Treat extension build failures as a downgrade, not an error."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing toolchain
            _skip(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # compiler/linker failure
            _skip(exc)


ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "gradstop._kernels._speed",
                ["src/gradstop/_kernels/_speed.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError as exc:  # pragma: no cover - build-environment dependent
    _skip(exc)

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
