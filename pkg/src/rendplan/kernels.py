"""Grid kernel backend selection.

The compiled extension carries the hot loops (sensing, pathfinding, frontier
labeling); the pure backend is a drop-in replacement selected automatically
when the extension is missing, or explicitly with RENDPLAN_PURE=1. Both
produce identical outputs; benchmarks/bench_kernels.py compares their speed.
"""

import os

from . import _gridpure
from ._gridpure import FREE, OCCUPIED, SQRT2, UNKNOWN

if os.environ.get("RENDPLAN_PURE"):
    _impl = _gridpure
else:
    try:
        from . import _gridcore as _impl
    except ImportError:
        _impl = _gridpure

BACKEND = _impl.backend_name()

cast_rays = _impl.cast_rays
astar = _impl.astar
dijkstra_counts = _impl.dijkstra_counts
frontier_labels = _impl.frontier_labels

__all__ = [
    "BACKEND",
    "FREE",
    "OCCUPIED",
    "SQRT2",
    "UNKNOWN",
    "astar",
    "cast_rays",
    "dijkstra_counts",
    "frontier_labels",
]
