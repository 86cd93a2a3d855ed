"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the pure-Python
fallback. Set ``UNICYCLE_ESC_BACKEND=python`` to force the fallback.
"""

import os

from . import _kernels_py as python_backend

try:
    from . import _kernels as compiled_backend
except ImportError:  # extension not built
    compiled_backend = None

if compiled_backend is not None and os.environ.get("UNICYCLE_ESC_BACKEND", "").lower() != "python":
    _active = compiled_backend
    BACKEND = "cython"
else:
    _active = python_backend
    BACKEND = "python"

integrate_window = _active.integrate_window
gekf_predict = _active.gekf_predict


def backends():
    """Available backends as ``{name: module}``."""
    out = {"python": python_backend}
    if compiled_backend is not None:
        out["cython"] = compiled_backend
    return out
