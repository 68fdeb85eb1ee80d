"""Backend selection for the event kernels.

The compiled module is used when it imports; otherwise the pure-Python
reference loops. Set ``EPISTOCH_PURE_PYTHON=1`` to force the fallback.
Both backends produce identical events for identical seeds.
"""
import os

from . import _kernels_py

INFECTION = _kernels_py.INFECTION
END_LATENCY = _kernels_py.END_LATENCY
RECOVERY = _kernels_py.RECOVERY


def _load():
    if os.environ.get("EPISTOCH_PURE_PYTHON", "") not in ("", "0"):
        return _kernels_py, "python"
    try:
        from . import _kernels
    except ImportError:
        return _kernels_py, "python"
    return _kernels, "cython"


_impl, BACKEND = _load()

gse_events = _impl.gse_events
household_events = _impl.household_events
