"""Batch geometry kernels with a compiled core and a numpy fallback.

The compiled extension is used when it imported cleanly; set KINPLEX_PURE=1
to force the numpy implementation.  Both backends share signatures and
agree numerically (see tests/test_kernels.py), so callers never branch.
"""

import os

from . import _fallback

if os.environ.get("KINPLEX_PURE"):
    _impl = _fallback
    BACKEND = "fallback"
else:
    try:
        from . import _native as _impl

        BACKEND = "native"
    except ImportError:
        _impl = _fallback
        BACKEND = "fallback"

dh_fk_batch = _impl.dh_fk_batch
planar_rr_batch = _impl.planar_rr_batch
pointing_batch = _impl.pointing_batch
scara_batch = _impl.scara_batch
sv_extremes2_batch = _impl.sv_extremes2_batch

__all__ = [
    "BACKEND",
    "dh_fk_batch",
    "planar_rr_batch",
    "pointing_batch",
    "scara_batch",
    "sv_extremes2_batch",
]
