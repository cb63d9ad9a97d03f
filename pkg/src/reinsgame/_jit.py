"""JIT dispatch: numba-compiled kernels with a pure-Python fallback lane.

Every hot kernel in this package is written as nopython-compatible scalar
code and decorated with :func:`jit`.  When numba is installed and the
environment variable ``REINSGAME_DISABLE_JIT`` is unset (or falsy), the
kernels are compiled with ``numba.njit(cache=True)``.  Otherwise the same
source runs as plain Python, so both lanes execute identical arithmetic.

Set ``REINSGAME_DISABLE_JIT=1`` to force the fallback lane (used by the
lane-parity tests and the benchmark in ``benchmarks/bench_lanes.py``).
"""

import os

_DISABLED = os.environ.get("REINSGAME_DISABLE_JIT", "").strip().lower() in (
    "1",
    "true",
    "yes",
    "on",
)

try:
    from numba import njit as _njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _njit = None
    _HAVE_NUMBA = False

JIT_ENABLED = _HAVE_NUMBA and not _DISABLED


def jit(fn):
    """Compile ``fn`` with numba when enabled, else return it unchanged."""
    if JIT_ENABLED:
        return _njit(cache=True)(fn)
    return fn
