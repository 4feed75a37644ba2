"""Hot-loop kernels with compiled/pure-Python backend selection.

The only sequential inner loop in the simulator is the per-detector
dead-time filter over candidate detection events.  A Cython build of the
loop is used when available; setting the environment variable
``SIQKD_PURE_PYTHON=1`` forces the pure Python fallback (used by the
backend-equivalence tests and the benchmark).
"""

import os

from . import _deadtime_py

if os.environ.get("SIQKD_PURE_PYTHON", "") == "1":
    _impl = _deadtime_py
    BACKEND = "python"
else:
    try:
        from . import _deadtime_cy as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _deadtime_py
        BACKEND = "python"


def deadtime_filter(times, detectors, dead_times, n_detectors):
    """Mark which chronologically sorted events survive detector dead time.

    An accepted event at time t blocks every later event on the same
    detector with time t' < t + dead_time.  Events on other detectors are
    unaffected (non-paralyzable model).

    Parameters
    ----------
    times : float64 array, event times in seconds, sorted ascending
    detectors : int64 array, detector index per event
    dead_times : float64 array of per-detector dead times in seconds
    n_detectors : number of detectors

    Returns a boolean acceptance mask.
    """
    import numpy as np

    times = np.ascontiguousarray(times, dtype=np.float64)
    detectors = np.ascontiguousarray(detectors, dtype=np.int64)
    dead_times = np.ascontiguousarray(dead_times, dtype=np.float64)
    if times.shape != detectors.shape:
        raise ValueError("times and detectors must have equal length")
    if dead_times.shape[0] != n_detectors:
        raise ValueError("need one dead time per detector")
    return _impl.deadtime_filter(times, detectors, dead_times, n_detectors)
