"""Build the optional compiled kernels; the package still installs without them."""
import logging
import os

import numpy as np
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

log = logging.getLogger(__name__)

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


class OptionalBuildExt(build_ext):
    """Fall back to the pure-Python kernels when compilation fails."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001 - any toolchain failure
            log.warning("compiled kernels not built (%s); using the Python fallback", exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            log.warning("failed to build %s (%s); using the Python fallback", ext.name, exc)


def extensions():
    if cythonize is None or os.environ.get("JQRC_NO_EXT"):
        return []
    flags = ["-O3", "-fcx-limited-range", "-fno-math-errno"]
    if not os.environ.get("JQRC_PORTABLE"):
        flags.append("-march=native")
    ext = Extension(
        "josephson_qrc._kernels",
        ["src/josephson_qrc/_kernels.pyx"],
        include_dirs=[np.get_include(), "src/josephson_qrc"],
        extra_compile_args=flags,
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": 3})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
