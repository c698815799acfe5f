"""Kernel backend selection.

The compiled Cython core is used when present; setting NEUROLOGIC_PURE=1
forces the pure numpy fallback.  Both backends implement identical
semantics (verified by tests/test_kernels.py); `BACKEND` reports which one
is active.
"""

import os

if os.environ.get("NEUROLOGIC_PURE"):
    from . import pure as _impl
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import pure as _impl

BACKEND = _impl.BACKEND
best_cuts = _impl.best_cuts
best_gini_split = _impl.best_gini_split
