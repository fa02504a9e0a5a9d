import sys

from setuptools import Extension, setup

# The compiled loop must stay bit-compatible with the pure-Python engine:
# no fast-math, and FP contraction off so a*b+c is never fused into an FMA.
if sys.platform == "win32":
    FLAGS = ["/O2", "/fp:strict"]
else:
    FLAGS = ["-O2", "-fno-fast-math", "-ffp-contract=off"]


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "modelfree.engine._loop_cy",
        ["src/modelfree/engine/_loop_cy.pyx"],
        extra_compile_args=FLAGS,
    )
    ext.optional = True  # the pure-Python engine remains a full fallback
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions())
