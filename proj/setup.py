"""Builds the _core extension from the C++ sources.

The CMake build produces the same module for development; this setup exists
so `pip install -e . --no-build-isolation` works without CMake.
"""

from glob import glob

from pybind11.setup_helpers import ParallelCompile, Pybind11Extension, build_ext
from setuptools import setup

ParallelCompile("NPY_NUM_BUILD_JOBS").install()

sources = sorted(glob("src/*.cpp")) + ["src/bindings/pymodule.cpp"]

setup(
    ext_modules=[
        Pybind11Extension(
            "tabaug._core",
            sources,
            include_dirs=["include", "vendor"],
            cxx_std=20,
            extra_compile_args=["-O2"],
            extra_link_args=["-pthread"],
        )
    ],
    cmdclass={"build_ext": build_ext},
)
