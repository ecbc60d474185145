from glob import glob

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

core_sources = sorted(glob("src/*.cpp"))

ext = Pybind11Extension(
    "eqm._core",
    ["bindings/pymodule.cpp", *core_sources],
    include_dirs=["include", "vendor", "/usr/include/eigen3"],
    libraries=["fftw3"],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
