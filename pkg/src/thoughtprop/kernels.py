"""Select the compiled graph kernels when built, else the pure-Python ones.

Set ``THOUGHTPROP_PURE_PYTHON=1`` to force the fallback.
"""

import os

from thoughtprop import _pykernels

if os.environ.get("THOUGHTPROP_PURE_PYTHON"):
    _impl = _pykernels
    IMPLEMENTATION = "python"
else:
    try:
        from thoughtprop import _ckernels as _impl
    except ImportError:
        _impl = _pykernels
        IMPLEMENTATION = "python"
    else:
        IMPLEMENTATION = "cython"

dijkstra = _impl.dijkstra
best_simple_path = _impl.best_simple_path

__all__ = ["IMPLEMENTATION", "best_simple_path", "dijkstra"]
