#!/usr/bin/env python3
"""Compare the compiled kernel extension against the pure-Python fallback.

Workloads mirror what the simulator actually does per tick: batched MPC
rollouts with fused cost/feasibility evaluation, steering-lattice searches
and segment clearance queries.  Run from the repo root:

    python3 benchmarks/bench_kernels.py
"""

import math
import time

import numpy as np

from ltlfleet.kernels import _fallback

try:
    from ltlfleet.kernels import _native
except ImportError:
    _native = None


def timeit(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads():
    rng = np.random.default_rng(0)
    inputs = rng.uniform(-0.35, 0.35, size=(2000, 10, 2))
    rects = np.array([[1.0, 1.0, 2.0, 2.0], [3.0, 4.0, 4.0, 5.0]])
    discs = np.array([[2.5, 2.5, 0.3], [4.0, 1.0, 0.3]])
    traps = np.array([[0.0, 4.0, 1.0, 5.0]])
    qd, rd, qnd = (1.0, 1.0, 0.1), (0.1, 0.05), (5.0, 5.0, 0.1)

    def bench(mod):
        states = mod.rollout_batch(0.5, 0.5, 0.3, inputs, 0.3)

        def mpc():
            mod.mpc_evaluate(
                states, inputs, (4.5, 3.5), (4.0, 3.0, 5.0, 4.0), qd, rd, qnd,
                1.0, 2.0, 0.05, rects, discs, traps, 0.3,
                (0.0, 0.0, 5.0, 6.0), 0.3, 0.4,
            )

        def rollouts():
            mod.rollout_batch(0.5, 0.5, 0.3, inputs, 0.3)

        def steer():
            for i in range(50):
                mod.steer_grid(
                    2.0, 2.0, 0.1 * i, 2.5, 2.6, 0.3, 0.35, 0.35, 21, 0.5, 5, 0.1
                )

        def clearance():
            for i in range(500):
                mod.segment_clearance(0.1 * i % 5, 0.5, 4.5, 5.5, rects, discs)

        return {
            "rollout_batch 2000x10": rollouts,
            "mpc_evaluate 2000x10": mpc,
            "steer_grid 21x21 x50": steer,
            "segment_clearance x500": clearance,
        }

    return bench


def main():
    build = workloads()
    mods = [("python", _fallback)]
    if _native is not None:
        mods.append(("native", _native))
    results = {}
    for name, mod in mods:
        for label, fn in build(mod).items():
            fn()  # warm up
            results[(label, name)] = timeit(fn, repeat=5)

    labels = sorted({label for label, _ in results})
    print(f"{'workload':28s} {'python':>10s} {'native':>10s} {'speedup':>8s}")
    for label in labels:
        py = results[(label, "python")]
        if _native is None:
            print(f"{label:28s} {py*1e3:9.2f}ms {'-':>10s} {'-':>8s}")
            continue
        nat = results[(label, "native")]
        print(f"{label:28s} {py*1e3:9.2f}ms {nat*1e3:9.2f}ms {py/nat:7.1f}x")
    if _native is None:
        print("\ncompiled extension not built; showing fallback only")


if __name__ == "__main__":
    main()
