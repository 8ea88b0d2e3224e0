"""Build script for the optional compiled inner-loop kernels.

The package is fully functional without the extension: vbreg._backend falls
back to the pure-numpy twin in vbreg._kernels_py when the compiled module is
missing. A failed extension build therefore degrades the install instead of
breaking it.
"""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible, otherwise install pure Python."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler or toolchain missing
            warnings.warn(f"skipping compiled kernels ({exc}); "
                          "falling back to the pure-Python backend")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"skipping {ext.name} ({exc}); "
                          "falling back to the pure-Python backend")


def _extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        warnings.warn("Cython not available; building without compiled kernels")
        return []
    return cythonize(
        [Extension("vbreg._kernels", ["src/vbreg/_kernels.pyx"])],
        language_level=3,
    )


setup(ext_modules=_extensions(), cmdclass={"build_ext": OptionalBuildExt})
