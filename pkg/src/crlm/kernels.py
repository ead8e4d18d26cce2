"""Backend selection for the loss-scan kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``CRLM_PURE_PYTHON`` is set to a non-empty value other
than ``0``, the numpy implementation is used. Both return identical bits.

``CRLM_THREADS`` caps the number of OpenMP threads used by the compiled scan
(default 1). Thread count never changes results.
"""
import os

from . import _kernels_py

_force_py = os.environ.get("CRLM_PURE_PYTHON", "") not in ("", "0")

_compiled = None
if not _force_py:
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

_impl = _compiled if _compiled is not None else _kernels_py
BACKEND = "cython" if _compiled is not None else "numpy"


def get_backend(name=None):
    """Return the kernel module called ``name`` ("cython" or "numpy").

    ``None`` returns the module selected at import.
    """
    if name is None:
        return _impl
    if name == "numpy":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def num_threads():
    try:
        return max(1, int(os.environ.get("CRLM_THREADS", "1")))
    except ValueError:
        return 1


def scan_losses(X, r2, inv, G):
    return _impl.scan_losses(X, r2, inv, G, num_threads())


def row_losses(X, rows, r2, inv, G):
    return _impl.row_losses(X, rows, r2, inv, G, num_threads())


def sqdist_to(X, x):
    return _impl.sqdist_to(X, x)


def any_within(Q, X, r2):
    return _impl.any_within(Q, X, r2)
