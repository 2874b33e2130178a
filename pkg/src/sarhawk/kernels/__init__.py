"""Hot-loop kernels with a compiled core and a pure-Python fallback.

The Cython extension (_fast) is picked at import when available; set
SARHAWK_PURE=1 to force the numpy fallback (_ref). ``BACKEND`` reports
which one is live.
"""

import os

if os.environ.get("SARHAWK_PURE"):
    from . import _ref as _impl
else:
    try:
        from . import _fast as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _ref as _impl

BACKEND = _impl.BACKEND
batch_scores = _impl.batch_scores
resample_polyline = _impl.resample_polyline
point_clear = _impl.point_clear
segment_clear = _impl.segment_clear

__all__ = ["BACKEND", "batch_scores", "resample_polyline", "point_clear", "segment_clear"]
