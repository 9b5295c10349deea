"""Time the numba and numpy kernel backends on the same workloads.

    python3 benchmarks/bench_backends.py [--repeat 3]

Prints best-of-N wall time per workload and the speedup of numba over numpy.
"""
import argparse
import time

import numpy as np

from icbounds.core import V_MIN, ChannelParams, PowerAllocation
from icbounds.kernels import load
from icbounds.optimizer import NM_FATOL, NM_XATOL, _instance, _random_starts, _steps


def nm_workload(n_allocs=257, starts_per=32):
    ch = ChannelParams(10.0, 0.1)
    blocks, insts = [], []
    for i in range(n_allocs):
        p1 = ch.P * i / (n_allocs - 1)
        inst = _instance(ch, PowerAllocation(ch.P - p1, p1, p1))
        blocks.append(_random_starts(inst, starts_per, 0, i))
        insts.append(np.repeat(inst[None, :], starts_per, axis=0))
    starts = np.vstack(blocks)
    return starts, _steps(starts), np.vstack(insts)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    starts, steps, insts = nm_workload()
    ch = ChannelParams(10.0, 0.1)
    grid_inst = _instance(ch, PowerAllocation.symmetric(ch, 0.0))
    axis = np.arange(65) / 64

    backends = {}
    for name in ("numpy", "numba"):
        try:
            backends[name] = load(name)
        except ImportError:
            print(f"{name}: unavailable")
    workloads = {
        f"nelder-mead x{len(starts)}": lambda k: k.nelder_mead_batch(starts, steps, insts, V_MIN, 500, NM_FATOL, NM_XATOL),
        "grid 65^4": lambda k: k.grid_search(axis, axis, grid_inst, V_MIN),
    }
    for label, work in workloads.items():
        timing = {}
        for name, k in backends.items():
            work(k)  # compile / warm caches
            timing[name] = best_of(lambda: work(k), args.repeat)
            print(f"{label:<22} {name:<6} {timing[name]:8.3f} s")
        if len(timing) == 2:
            print(f"{label:<22} speedup {timing['numpy'] / timing['numba']:6.1f}x")


if __name__ == "__main__":
    main()
