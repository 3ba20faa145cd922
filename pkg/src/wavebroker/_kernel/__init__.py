"""Placement kernel with an optional native fast path.

The Cython extension is a drop-in replacement for the pure-Python kernel
and is preferred when importable.  Set ``WAVEBROKER_PURE=1`` to force the
pure implementation (useful for benchmarking and for debugging suspected
kernel divergence).
"""

import os

if os.environ.get("WAVEBROKER_PURE"):
    from .placement_py import cheapest_placement

    BACKEND = "pure"
else:
    try:
        from ._placement import cheapest_placement  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        from .placement_py import cheapest_placement  # type: ignore[no-redef]

        BACKEND = "pure"

__all__ = ["cheapest_placement", "BACKEND"]
