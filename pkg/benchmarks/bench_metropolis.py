"""Compare the compiled and pure-Python Metropolis kernels.

    python3 benchmarks/bench_metropolis.py [--count N] [--repeats R]

Both backends consume the same noise stream, so the script also checks that
they produce identical chains.
"""

import argparse
import time

import numpy as np

from carnot_ineq import _kernels
from carnot_ineq.group import make_heisenberg
from carnot_ineq.measures import BoltzmannMeasure, GProfile
from carnot_ineq.measures.sampler import mcmc_sample


def time_backend(measure, count, seed, backend, repeats):
    best, chain = np.inf, None
    for _ in range(repeats):
        t0 = time.perf_counter()
        chain = mcmc_sample(measure, count, seed, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, chain


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=200_000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    G = make_heisenberg()
    backends = ["python"] + (["cython"] if _kernels.compiled_available() else [])
    print(f"active backend: {_kernels.BACKEND}; count = {args.count}")
    for prof in (GProfile.power(4), GProfile.cosh_power(1), GProfile.power_log(3)):
        measure = BoltzmannMeasure(G, prof)
        times, chains = {}, {}
        for b in backends:
            times[b], chains[b] = time_backend(measure, args.count, 7, b, args.repeats)
        line = f"{prof.label:>16}: " + "  ".join(f"{b} {times[b]:.3f}s" for b in backends)
        if len(backends) == 2:
            same = np.array_equal(chains["python"].x, chains["cython"].x) and np.array_equal(
                chains["python"].z, chains["cython"].z
            )
            line += f"  speedup {times['python'] / times['cython']:.1f}x  identical={same}"
        print(line)


if __name__ == "__main__":
    main()
