"""Build script: compiles the optional Cython kernel for the exact 0-1 ERM sweep.

The compiled extension is a pure accelerator. If it cannot be built the
install still succeeds and the package falls back to the numpy kernels at
import time (see fiprobe.kernels).
"""

import numpy as np
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible; never fail the install."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"fiprobe: skipping compiled kernel ({exc}); "
                  "pure-numpy fallback will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"fiprobe: failed to build {ext.name} ({exc}); "
                  "pure-numpy fallback will be used")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "fiprobe._erm01fast",
        ["src/fiprobe/_erm01fast.pyx"],
        include_dirs=[np.get_include()],
        # -ffp-contract=off: no FMA contraction, keeps the kernel's float
        # semantics aligned with the numpy fallback
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
