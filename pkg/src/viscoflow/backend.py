"""Kernel backend selection.

Every performance-critical kernel in this package exists twice: a
Numba-compiled version (``_pointwise_numba`` / ``_stencil_numba``) and a
vectorized pure-NumPy version (``_pointwise_numpy`` / ``_stencil_numpy``).
The environment variable ``VISCOFLOW_NUMBA`` picks the lane at import time:

    VISCOFLOW_NUMBA=auto   use Numba if it imports cleanly (default)
    VISCOFLOW_NUMBA=1      require Numba, raise ImportError if missing
    VISCOFLOW_NUMBA=0      force the pure-NumPy lane

The active lane is recorded in ``BACKEND`` ("numba" or "numpy") and is
written into run manifests: the two lanes agree to tight tolerances but not
necessarily to the last ulp, so reproducibility claims are per-lane.
"""

from __future__ import annotations

import os

_flag = os.environ.get("VISCOFLOW_NUMBA", "auto").strip().lower()

if _flag in ("0", "off", "false", "no", "numpy"):
    NUMBA_ENABLED = False
elif _flag in ("1", "on", "true", "yes", "numba", "require"):
    import numba  # noqa: F401  (fail loudly if unavailable)

    NUMBA_ENABLED = True
else:
    try:
        import numba  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False

BACKEND = "numba" if NUMBA_ENABLED else "numpy"


def set_threads(n: int) -> int:
    """Set the kernel thread count; returns the count actually in effect.

    The NumPy lane is single-threaded (BLAS aside) and ignores this.
    """
    if n < 1:
        raise ValueError("thread count must be >= 1")
    if not NUMBA_ENABLED:
        return 1
    import numba

    n_eff = min(n, numba.config.NUMBA_NUM_THREADS)
    numba.set_num_threads(n_eff)
    return n_eff


def get_threads() -> int:
    if not NUMBA_ENABLED:
        return 1
    import numba

    return numba.get_num_threads()
