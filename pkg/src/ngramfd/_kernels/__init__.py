"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports and ``NGRAMFD_DISABLE_JIT`` is
unset (or "0"). Both implementations stay importable as ``numpy_impl`` and
``jit_impl`` (None without numba) for testing and benchmarking.

Kernels work on padded arrays: ``W[i, :sizes[i]]`` holds the weights of
position ``i`` and the padding is zero.
"""

import os

from . import _numpy as numpy_impl

try:
    from . import _jit as jit_impl
except ImportError:  # numba missing
    jit_impl = None


def jit_requested() -> bool:
    return os.environ.get("NGRAMFD_DISABLE_JIT", "0").lower() in ("", "0", "false", "no")


active = jit_impl if (jit_impl is not None and jit_requested()) else numpy_impl
BACKEND = "numba" if active is jit_impl else "numpy"

window_codes = active.window_codes
hull_delta1 = active.hull_delta1
hull_delta2 = active.hull_delta2
hull_update = active.hull_update

__all__ = [
    "BACKEND",
    "numpy_impl",
    "jit_impl",
    "window_codes",
    "hull_delta1",
    "hull_delta2",
    "hull_update",
]
