"""Build the optional Cython sampling core.

If Cython, numpy headers or a C compiler are missing, the package installs
without the extension and ``gibbstree._backend`` falls back to the
pure-Python kernels.
"""

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            self.warn(f"skipping compiled kernels: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            self.warn(f"skipping {ext.name}: {exc}")


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "gibbstree._ckernels",
        ["src/gibbstree/_ckernels.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O2"],
    )
    return cythonize([ext], language_level="3")


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
