"""Kernel backend selection.

Imports the compiled Cython kernels when available, falling back to the
pure-numpy implementations in qdistil._kernels_py.  Setting the
environment variable QDISTIL_PURE_PYTHON=1 forces the fallback.  The
selected backend name is exposed as ``BACKEND``.
"""
import os

from ._kernels_py import (  # noqa: F401  (status codes are backend-independent)
    WHITEN_NO_CONVERGENCE,
    WHITEN_OK,
    WHITEN_SINGULAR_MARGINAL,
)

if os.environ.get("QDISTIL_PURE_PYTHON"):
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"

whiten_loop = _impl.whiten_loop
filter_profile = _impl.filter_profile
