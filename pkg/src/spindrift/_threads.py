"""Thread-count policy for the numerical kernels.

The environment variable ``SPINDRIFT_THREADS`` caps how many worker threads
the FFT-based convolutions may use. Default is all available cores.
"""

from __future__ import annotations

import os

_ENV_VAR = "SPINDRIFT_THREADS"


def get_threads() -> int:
    """Return the worker-thread cap, honoring ``SPINDRIFT_THREADS``."""
    available = os.cpu_count() or 1
    raw = os.environ.get(_ENV_VAR)
    if raw is None:
        return available
    try:
        requested = int(raw)
    except ValueError as exc:
        raise ValueError(
            f"{_ENV_VAR} must be a positive integer, got {raw!r}"
        ) from exc
    if requested < 1:
        raise ValueError(f"{_ENV_VAR} must be >= 1, got {requested}")
    return min(requested, available)
