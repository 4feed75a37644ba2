"""Pure Python dead-time filter, kept in lockstep with the Cython build."""

import numpy as np


def deadtime_filter(times, detectors, dead_times, n_detectors):
    n = times.shape[0]
    accepted = np.zeros(n, dtype=bool)
    live_at = [-np.inf] * n_detectors
    tl = times.tolist()
    dl = detectors.tolist()
    dt = dead_times.tolist()
    for i in range(n):
        d = dl[i]
        t = tl[i]
        if t >= live_at[d]:
            accepted[i] = True
            live_at[d] = t + dt[d]
    return accepted
