"""Kernel backend selection.

The compiled extension is used when it imports; set ``DBFABRIC_PURE_PYTHON=1``
to force the fallback.
"""
import os

from . import _maxmin_py

BACKEND = "python"
maxmin_fill = _maxmin_py.maxmin_fill

if os.environ.get("DBFABRIC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _maxmin
    except ImportError:
        pass
    else:
        maxmin_fill = _maxmin.maxmin_fill
        BACKEND = "cython"

python_maxmin_fill = _maxmin_py.maxmin_fill


def compiled_maxmin_fill():
    """The compiled kernel, or None if the extension is not built."""
    try:
        from . import _maxmin
    except ImportError:
        return None
    return _maxmin.maxmin_fill
