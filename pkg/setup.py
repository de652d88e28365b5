from setuptools import Extension, setup
from Cython.Build import cythonize

# No -ffast-math: the compiled kernels must produce bit-identical results to
# the pure-Python fallback (same IEEE-754 double operations in the same order).
# -fno-builtin-sin/-cos stops gcc from fusing adjacent sin/cos calls into
# glibc sincos, whose rounding can differ by an ulp from separate calls.
extensions = [
    Extension(
        "kanlab._kernels",
        ["src/kanlab/_kernels.pyx"],
        extra_compile_args=["-O2", "-fno-builtin-sin", "-fno-builtin-cos"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
