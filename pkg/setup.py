"""Build script for the optional compiled kernels.

The package is fully functional without the extension: ``recotree.kernels``
falls back to a vectorised pure-Python backend when ``recotree._speedups``
is missing.  Set RECOTREE_NO_EXT=1 to skip the extension build entirely.
"""

import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class _OptionalBuildExt(build_ext):
    """Build the extension if possible, otherwise warn and continue."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - depends on toolchain
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover - depends on toolchain
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            "warning: failed to build recotree._speedups (%s); "
            "the pure-Python backend will be used" % (exc,),
            file=sys.stderr,
        )


def _extensions():
    if os.environ.get("RECOTREE_NO_EXT") == "1":
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:  # pragma: no cover - cython is a build requirement
        return []
    return cythonize(
        [Extension("recotree._speedups", ["src/recotree/_speedups.pyx"])],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )


setup(
    ext_modules=_extensions(),
    cmdclass={"build_ext": _OptionalBuildExt},
    zip_safe=False,
)
