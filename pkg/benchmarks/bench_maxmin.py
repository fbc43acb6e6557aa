"""Time the compiled and pure-Python max-min kernels on real sweep cells.

    python benchmarks/bench_maxmin.py [--sizes 8 16 32 64] [--repeat 3]
"""
import argparse
import time

import numpy as np

from dbfabric import kernels
from dbfabric.sim import SCHEMES, build_for_scheme, generate_traffic, route_connections


def kernel_inputs(scheme, n_tor, seed):
    fab = build_for_scheme(scheme, n_tor, seed)
    conns = route_connections(fab, scheme, generate_traffic(fab, seed), seed)
    flat = np.array([c for conn in conns for c in conn.channels], dtype=np.int64)
    used, local = np.unique(flat, return_inverse=True)
    ptr = np.cumsum([0] + [len(c.channels) for c in conns]).astype(np.int64)
    caps = np.asarray(fab.channel_capacities(), dtype=np.float64)[used]
    return ptr, local.astype(np.int64), np.ascontiguousarray(caps)


def best_of(fn, args, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", nargs="+", type=int, default=[8, 16, 32, 64])
    ap.add_argument("--schemes", nargs="+", default=list(SCHEMES))
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    compiled = kernels.compiled_maxmin_fill()
    print(f"{'scheme':<14}{'n_tor':>6}{'conns':>7}{'python ms':>12}{'cython ms':>12}{'speedup':>9}  identical")
    for n in args.sizes:
        for scheme in args.schemes:
            inputs = kernel_inputs(scheme, n, 0)
            tp, rp = best_of(kernels.python_maxmin_fill, inputs, args.repeat)
            if compiled is None:
                print(f"{scheme:<14}{n:>6}{len(inputs[0]) - 1:>7}{tp * 1e3:>12.2f}{'n/a':>12}")
                continue
            tc, rc = best_of(compiled, inputs, args.repeat)
            print(f"{scheme:<14}{n:>6}{len(inputs[0]) - 1:>7}{tp * 1e3:>12.2f}{tc * 1e3:>12.3f}"
                  f"{tp / tc:>8.0f}x  {rp.tobytes() == rc.tobytes()}")


if __name__ == "__main__":
    main()
