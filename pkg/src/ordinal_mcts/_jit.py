"""Backend switch for the numeric kernels.

Set ``ORDINAL_MCTS_NO_NUMBA=1`` to force the pure-numpy implementations.
Numba is used only when it imports cleanly and the flag is unset.
"""
import os

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

_flag = os.environ.get("ORDINAL_MCTS_NO_NUMBA", "").strip().lower()
NUMBA_ENABLED = njit is not None and _flag in ("", "0", "false", "no")


def optional_njit(func):
    """Compile ``func`` with numba, or return it untouched when unavailable."""
    if njit is None:
        return func
    return njit(cache=False)(func)


def pick(jitted, fallback):
    return jitted if NUMBA_ENABLED else fallback
