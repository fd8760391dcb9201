"""Hot loops: path tracking and lonesum enumeration.

The compiled extension ``_core`` is used when it was built; otherwise the
pure-Python twin in ``_fallback`` is selected.  Set ``MISSML_PURE_PYTHON=1``
to force the fallback.
"""
import os

from . import _fallback

BACKEND = "python"
if not os.environ.get("MISSML_PURE_PYTHON"):
    try:
        from . import _core as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _fallback
else:
    _impl = _fallback

track_paths = _impl.track_paths
newton_refine = _impl.newton_refine
evaluate = _impl.evaluate
count_lonesum_range = _impl.count_lonesum_range

OK, DIVERGED, MINSTEP, MAXSTEPS = 0, 1, 2, 3

__all__ = ["BACKEND", "track_paths", "newton_refine", "evaluate", "count_lonesum_range",
           "OK", "DIVERGED", "MINSTEP", "MAXSTEPS"]
