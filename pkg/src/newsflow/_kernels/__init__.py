"""Kernel backend selection.

The compiled extension is used when it was built; otherwise, or when the
environment variable ``NEWSFLOW_PURE=1`` is set, the pure-Python kernels are
used. Both backends produce identical results.
"""

import os

from . import _pure

BACKEND = "pure"
_impl = _pure

if os.environ.get("NEWSFLOW_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ext
    except ImportError:
        pass
    else:
        _impl = _ext
        BACKEND = "cython"


def available_backends():
    names = {"pure": _pure}
    try:
        from . import _ext
    except ImportError:
        pass
    else:
        names["cython"] = _ext
    return names


ci_values = _impl.ci_values
ci_removal = _impl.ci_removal
gc_trajectory = _impl.gc_trajectory
largest_component = _impl.largest_component
wcc_labels = _impl.wcc_labels
loess = _impl.loess

__all__ = [
    "BACKEND",
    "available_backends",
    "ci_values",
    "ci_removal",
    "gc_trajectory",
    "largest_component",
    "wcc_labels",
    "loess",
]
