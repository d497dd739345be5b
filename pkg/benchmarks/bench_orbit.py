"""Benchmark the orbit kernels: numba scalar loop vs vectorized numpy.

Usage: python benchmarks/bench_orbit.py [--trials N] [--steps K] [--nodes M]

The same instruction tape drives both backends; the run checks they agree
before timing.  Set NETSTAB_NO_NUMBA=1 to confirm the package itself
falls back cleanly.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from netstab import engine
from netstab.network import make_cohen_grossberg


def build_benchmark_network(nodes: int):
    """Delayed ring with leak: every node reads both neighbors through
    tanh at heterogeneous delays."""
    rng = np.random.default_rng(12345)
    W = np.zeros((nodes, nodes))
    delays = np.zeros((nodes, nodes), dtype=int)
    for j in range(nodes):
        for i in ((j - 1) % nodes, (j + 1) % nodes):
            W[i, j] = rng.uniform(0.05, 0.25)
            delays[i, j] = int(rng.integers(0, 4))
    return make_cohen_grossberg(
        W, 0.5, b=1.0, c=rng.uniform(-0.2, 0.2, nodes),
        delays=delays, self_delays=np.ones(nodes, dtype=int),
        name="bench_ring",
    )


def time_backend(program, histories, steps, backend, repeats=3):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        engine.run_orbit_batch(program, histories, steps, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--steps", type=int, default=5000)
    parser.add_argument("--nodes", type=int, default=12)
    args = parser.parse_args()

    net = build_benchmark_network(args.nodes)
    program = engine.compile_network(net)
    rng = np.random.default_rng(0)
    histories = rng.uniform(-1, 1, (args.trials, net.T, net.size))

    print(f"network: {net.size} nodes, T = {net.T}, "
          f"{program.ops.shape[0]} instructions per step")
    print(f"workload: {args.trials} trials x {args.steps} steps")

    s_np, _, _ = engine.run_orbit_batch(program, histories, args.steps, backend="numpy")
    t_np = time_backend(program, histories, args.steps, "numpy")
    print(f"numpy  (vectorized over trials): {t_np * 1e3:9.2f} ms")

    if not engine.HAVE_NUMBA:
        print("numba unavailable; skipping the compiled backend")
        return

    # warm the JIT cache before timing
    engine.run_orbit_batch(program, histories[:1], 10, backend="numba")
    s_nb, _, _ = engine.run_orbit_batch(program, histories, args.steps, backend="numba")
    t_nb = time_backend(program, histories, args.steps, "numba")
    print(f"numba  (compiled scalar kernel): {t_nb * 1e3:9.2f} ms")
    print(f"speedup: {t_np / t_nb:.1f}x")

    drift = np.abs(s_np - s_nb).max()
    print(f"max cross-backend deviation: {drift:.3e}")


if __name__ == "__main__":
    main()
