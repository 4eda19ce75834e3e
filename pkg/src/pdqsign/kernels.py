"""Backend selection for the hot kernels.

The compiled Cython extension is used when it was built; otherwise the
numpy fallback is loaded. Setting ``PDQSIGN_PURE_PYTHON=1`` forces the
fallback, which the test suite uses to check the two agree.
"""

import os

from . import _kernels_py

try:
    from . import _kernels as _ext
except ImportError:  # extension not built
    _ext = None

if _ext is not None and os.environ.get("PDQSIGN_PURE_PYTHON", "") not in ("1", "true", "yes"):
    _impl, BACKEND = _ext, "cython"
else:
    _impl, BACKEND = _kernels_py, "python"

pairwise_kth = _impl.pairwise_kth
weiszfeld = _impl.weiszfeld


def get_backend(name=None):
    """Return the kernel module for ``name`` ("cython", "python", or current)."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _ext is None:
            raise ImportError("compiled kernels are not available")
        return _ext
    raise ValueError(f"unknown backend {name!r}")
