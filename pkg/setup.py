import pybind11
from setuptools import Extension, setup

setup(
    ext_modules=[
        Extension(
            "shufflehall._fastcore",
            sources=["src/shufflehall/_fastcore.cpp"],
            include_dirs=[pybind11.get_include()],
            libraries=["gmpxx", "gmp"],
            extra_compile_args=["-O2", "-std=c++17"],
        )
    ]
)
