from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "cks._kernels",
        ["src/cks/_kernels.pyx"],
        # no FMA contraction: kernels must round exactly like the numpy oracles
        extra_compile_args=["-O3", "-fopenmp", "-ffp-contract=off"],
        extra_link_args=["-fopenmp"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
