"""Kernel backend selection.

The compiled Cython kernels are used when available; otherwise the pure-NumPy
twins are loaded. Set ``LURECERT_BACKEND=py`` (or ``cy``) to force a choice,
e.g. for the backend benchmark.
"""

import importlib
import os

_FORCED = os.environ.get("LURECERT_BACKEND", "").strip().lower()

if _FORCED == "py":
    _impl = importlib.import_module("lurecert._kernels_py")
    BACKEND = "python"
else:
    try:
        _impl = importlib.import_module("lurecert._kernels_cy")
        BACKEND = "cython"
    except ImportError:
        if _FORCED == "cy":
            raise
        _impl = importlib.import_module("lurecert._kernels_py")
        BACKEND = "python"

jacobi_eig = _impl.jacobi_eig
pwl_eval_array = _impl.pwl_eval_array
fixed_point_output = _impl.fixed_point_output
rk4_closed_loop = _impl.rk4_closed_loop


def get_backend(name=None):
    """Return the kernel module for ``name`` ("py" or "cy"), default current."""
    if name is None:
        return _impl
    if name == "py":
        return importlib.import_module("lurecert._kernels_py")
    if name == "cy":
        return importlib.import_module("lurecert._kernels_cy")
    raise ValueError(f"unknown backend {name!r}")
