"""Backend selection for the hot loops.

The compiled extension is used when it imported cleanly; otherwise the numpy
fallback is used. Both give the same numbers up to rounding.
"""

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = ("cython", "python") if _compiled is not None else ("python",)
_active = _compiled if _compiled is not None else _kernels_py


def backend():
    return "cython" if _active is _compiled and _compiled is not None else "python"


def set_backend(name):
    """Switch backend globally (used by the benchmark and the parity tests)."""
    global _active
    if name == "python":
        _active = _kernels_py
    elif name == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available; rebuild the package")
        _active = _compiled
    else:
        raise ValueError(f"unknown backend {name!r}")


def get(name):
    """Return the module implementing backend ``name``."""
    if name == "python":
        return _kernels_py
    if name == "cython" and _compiled is not None:
        return _compiled
    raise ValueError(f"backend {name!r} not available")


def displacement_block(alpha, L):
    return _active.displacement_block(complex(alpha), int(L))


def weyl_trace_grid(F, a, b):
    return _active.weyl_trace_grid(F, a, b)


def translate_trace_grid(F, G, a, b):
    return _active.translate_trace_grid(F, G, a, b)


def gaussian_gram(points, mean, cov, form):
    return _active.gaussian_gram(points, mean, cov, form)
