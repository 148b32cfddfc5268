"""Hot numerical kernels with a compiled fast path.

The Cython extension is used when it imported cleanly; set
WIGFLUX_PURE_PYTHON=1 to force the numpy fallback (useful for debugging
and for the backend benchmark).
"""

import os

from . import _core_py

if os.environ.get("WIGFLUX_PURE_PYTHON", "").strip() not in ("", "0"):
    _impl = _core_py
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _core_py
        BACKEND = "python"

fp_rhs = _impl.fp_rhs
ou_paths = _impl.ou_paths
dephasing_paths = _impl.dephasing_paths
sigma_accumulate = _impl.sigma_accumulate


def get_backend(name=None):
    """Kernel namespace by name ('python' or 'cython'); default the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _core_py
    if name == "cython":
        from . import _core
        return _core
    raise ValueError(f"unknown backend {name!r}")


__all__ = ["BACKEND", "dephasing_paths", "fp_rhs", "get_backend",
           "ou_paths", "sigma_accumulate"]
