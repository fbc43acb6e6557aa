"""Pure-Python progressive-filling kernel (fallback for the compiled one)."""
import numpy as np


def maxmin_fill(conn_ptr, conn_chan, capacity, rel_tol=1e-12):
    """Max-min fair rates for connections given as a CSR channel list.

    All unfrozen connections share one water level. Each round raises the
    level to the smallest per-channel fair share, freezes every connection
    on a channel that saturates at that level, and charges their rate to
    the other channels they cross.
    """
    conn_ptr = [int(x) for x in conn_ptr]
    conn_chan = [int(x) for x in conn_chan]
    capacity = [float(x) for x in capacity]
    n = len(conn_ptr) - 1
    nc = len(capacity)
    rates = [0.0] * n
    count = [0] * nc
    frozen_sum = [0.0] * nc
    frozen = [False] * n
    chan_conn = [[] for _ in range(nc)]
    for i in range(n):
        for k in range(conn_ptr[i], conn_ptr[i + 1]):
            c = conn_chan[k]
            chan_conn[c].append(i)
            count[c] += 1

    active = [c for c in range(nc) if count[c] > 0]
    remaining = n
    level = 0.0
    while remaining > 0:
        best = -1.0
        for c in active:
            if count[c] > 0:
                t = (capacity[c] - frozen_sum[c]) / count[c]
                if best < 0.0 or t < best:
                    best = t
        if best < level:
            best = level
        level = best
        cut = best * (1.0 + rel_tol)
        sat = [c for c in active if count[c] > 0 and (capacity[c] - frozen_sum[c]) / count[c] <= cut]
        for c in sat:
            for i in chan_conn[c]:
                if frozen[i]:
                    continue
                frozen[i] = True
                rates[i] = level
                remaining -= 1
                for j in range(conn_ptr[i], conn_ptr[i + 1]):
                    count[conn_chan[j]] -= 1
                    frozen_sum[conn_chan[j]] += level
        active = [c for c in active if count[c] > 0]
    return np.array(rates, dtype=np.float64)
