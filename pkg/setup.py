import numpy
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the accelerator if the toolchain allows, else install pure."""

    def run(self):
        try:
            build_ext.run(self)
        except Exception as exc:
            print(f"extension build skipped ({exc}); using pure-python kernels")

    def build_extension(self, ext):
        try:
            build_ext.build_extension(self, ext)
        except Exception as exc:
            print(f"extension build skipped ({exc}); using pure-python kernels")


extensions = [
    Extension(
        "backflow._mlcore",
        ["src/backflow/_mlcore.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
    )
]

try:
    from Cython.Build import cythonize

    extensions = cythonize(extensions, language_level=3)
except ImportError:
    extensions = []

setup(ext_modules=extensions, cmdclass={"build_ext": optional_build_ext})
