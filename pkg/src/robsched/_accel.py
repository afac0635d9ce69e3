"""Acceleration mode selection.

Numba-compiled kernels are used when numba imports cleanly and the
environment variable ``ROBSCHED_DISABLE_NUMBA`` is unset.  Setting it to
``1`` (or ``true``/``yes``/``on``) forces the vectorized numpy fallbacks,
which compute the same quantities without JIT compilation.
"""

import os

_FLAG = os.environ.get("ROBSCHED_DISABLE_NUMBA", "").strip().lower()
NUMBA_DISABLED = _FLAG in {"1", "true", "yes", "on"}

try:
    import numba  # noqa: F401

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE and not NUMBA_DISABLED


def mode() -> str:
    """Return the active kernel mode, ``"numba"`` or ``"numpy"``."""
    return "numba" if USE_NUMBA else "numpy"
