"""Builds the _localopt extension by delegating to the project's CMake build,
so the pip package and the plain CMake build share one definition of the
module."""

import os
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        out_dir = Path(self.get_ext_fullpath(ext.name)).parent.resolve()
        source_dir = Path(__file__).parent.resolve()
        build_temp = Path(self.build_temp).resolve() / "cmake"
        build_temp.mkdir(parents=True, exist_ok=True)

        cmake_args = [
            f"-DCMAKE_LIBRARY_OUTPUT_DIRECTORY={out_dir}{os.sep}",
            f"-DPython3_EXECUTABLE={sys.executable}",
            "-DCMAKE_BUILD_TYPE=Release",
            "-DLOCALOPT_BUILD_PYTHON=ON",
            "-DLOCALOPT_BUILD_TESTS=OFF",
        ]
        try:
            import pybind11

            cmake_args.append(f"-Dpybind11_DIR={pybind11.get_cmake_dir()}")
        except ImportError:
            pass  # let CMake find a system pybind11

        subprocess.run(
            ["cmake", "-S", str(source_dir), "-B", str(build_temp), *cmake_args],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_temp), "--target", "_localopt",
             f"-j{os.cpu_count() or 1}"],
            check=True,
        )


setup(
    packages=["localopt"],
    package_dir={"": "python"},
    ext_modules=[CMakeExtension("localopt._localopt")],
    cmdclass={"build_ext": CMakeBuild},
)
