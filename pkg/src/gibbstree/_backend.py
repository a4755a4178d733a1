"""Select the sampling kernels: compiled if available, else pure Python.

Set ``GTL_PURE_PYTHON=1`` to force the fallback even when the extension is
built.  ``BACKEND`` names the selected implementation.
"""

import os

from . import _pykernels

try:
    if os.environ.get("GTL_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python kernels requested")
    from . import _ckernels as kernels
    BACKEND = "cython"
except ImportError:
    kernels = _pykernels
    BACKEND = "python"


def available_backends():
    """Mapping of backend name to kernel module for every importable backend."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out


def worker_count():
    """Worker cap from GTL_THREADS, defaulting to the CPU count."""
    raw = os.environ.get("GTL_THREADS", "")
    if raw.strip():
        try:
            value = int(raw)
        except ValueError:
            value = 1
        return max(1, value)
    return max(1, os.cpu_count() or 1)
