"""Build script: compiles the optional C diff kernel.

The package works without the extension (a pure-Python kernel is selected
at import time), so a failed compile downgrades to a warning instead of
aborting the install.
"""

import sys

from setuptools import setup

try:
    from Cython.Build import cythonize
    from setuptools import Extension

    extensions = cythonize(
        [
            Extension(
                "chatwright.diffing._kernel_c",
                ["src/chatwright/diffing/_kernel_c.pyx"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"chatwright: skipping C diff kernel ({exc}); "
          "pure-Python fallback will be used", file=sys.stderr)
    extensions = []

setup(ext_modules=extensions)
