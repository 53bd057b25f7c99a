#!/usr/bin/env python3
"""Benchmark the compiled event-loop kernel against the pure-Python fallback.

Both backends replay the exact same pre-drawn sample path, so the comparison
is pure kernel time.  Usage:

    python3 benchmarks/benchmark_backends.py [--horizon HOURS] [--repeats N]
"""

from __future__ import annotations

import argparse
import math
import statistics
import time

from silentq import SimConfig
from silentq.simulator.engine import available_backends, draw_inputs


def bench(kernel, args, repeats: int) -> list[float]:
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        kernel.run_queue_loop(*args)
        times.append(time.perf_counter() - start)
    return times


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--horizon", type=float, default=500.0, help="simulated hours")
    parser.add_argument("--lam", type=float, default=56.0, help="arrivals per hour")
    parser.add_argument("--repeats", type=int, default=5, help="timed repetitions")
    args = parser.parse_args()

    config = SimConfig(
        lam=args.lam, theta=30.0, q=0.4, n_slots=12, mu_sr=60.0 / 12.3,
        mu_sab=20.0, horizon=args.horizon, warmup=2.0, seed=0,
    )
    arrival, patience, indication, svc_uniform = draw_inputs(config)
    kernel_args = (
        arrival, patience, indication, svc_uniform,
        config.n_slots, config.mu_sr,
        0.0 if math.isinf(config.mu_sab) else config.mu_sab,
        math.isinf(config.mu_sab), config.horizon,
    )

    backends = available_backends()
    print(f"{len(arrival)} customers over {args.horizon:g} simulated hours, "
          f"{args.repeats} repetitions\n")
    results: dict[str, float] = {}
    for name, kernel in backends.items():
        kernel.run_queue_loop(*kernel_args)  # warm up
        times = bench(kernel, kernel_args, args.repeats)
        best = min(times)
        results[name] = best
        mean = statistics.fmean(times)
        rate = len(arrival) / best / 1e6
        print(f"{name:>8}: best {best * 1e3:8.2f} ms   mean {mean * 1e3:8.2f} ms   "
              f"{rate:6.2f} M customers/s")

    if "cython" in results and "python" in results:
        print(f"\nspeedup (compiled vs python): {results['python'] / results['cython']:.1f}x")
    else:
        print("\ncompiled kernel not built; only the python fallback was timed")


if __name__ == "__main__":
    main()
