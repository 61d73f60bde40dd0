"""Backend selection for the exact 0-1 ERM search kernels.

The compiled Cython kernel is preferred when importable; the numpy fallback
is always available. Set FIPROBE_PURE=1 to force the fallback (used by the
benchmark and by backend-equivalence tests).
"""

from __future__ import annotations

import os

from ._erm01 import erm01_1d_search, erm01_2d_search as _erm01_2d_pure

if os.environ.get("FIPROBE_PURE") == "1":
    _erm01_2d_impl = _erm01_2d_pure
    _BACKEND = "pure"
else:
    try:
        from ._erm01fast import erm01_2d_search as _erm01_2d_impl
        _BACKEND = "compiled"
    except ImportError:
        _erm01_2d_impl = _erm01_2d_pure
        _BACKEND = "pure"

erm01_2d_search = _erm01_2d_impl
erm01_2d_search_pure = _erm01_2d_pure


def backend_name() -> str:
    """Which 2-d ERM kernel is active: 'compiled' or 'pure'."""
    return _BACKEND


__all__ = ["erm01_1d_search", "erm01_2d_search", "erm01_2d_search_pure",
           "backend_name"]
