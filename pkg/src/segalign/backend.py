"""Kernel backend selection.

The hot numeric kernels in :mod:`segalign.kernels` ship in two flavours: a
numba ``@njit`` loop implementation and a vectorized pure-numpy fallback.
Selection happens once at import time:

* ``SEGALIGN_NUMBA=0`` (or ``false``/``off``/``no``) forces the numpy path.
* ``SEGALIGN_NUMBA=1`` requires numba and fails loudly if it is missing.
* unset: use numba when importable, numpy otherwise.

Both paths compute the same functions; they may differ in the last couple of
floating-point ULPs because summation order differs.
"""

from __future__ import annotations

import os

_FALSY = {"0", "false", "off", "no"}
_TRUTHY = {"1", "true", "on", "yes"}

ENV_FLAG = "SEGALIGN_NUMBA"


def _resolve() -> bool:
    raw = os.environ.get(ENV_FLAG, "").strip().lower()
    if raw in _FALSY:
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        if raw in _TRUTHY:
            raise RuntimeError(
                f"{ENV_FLAG}={raw!r} requested the numba backend but numba is not importable"
            )
        return False
    return True


NUMBA_ENABLED: bool = _resolve()


def active_backend() -> str:
    """Name of the kernel backend selected at import time."""
    return "numba" if NUMBA_ENABLED else "numpy"
