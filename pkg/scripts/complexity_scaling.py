#!/usr/bin/env python3
"""Measure how per-iteration search cost grows with the geophone count
and fit a log-log slope.  The fixed-order evaluator sorts K gains and
accumulates K interference terms per gateway for M candidates, so the
expected per-iteration cost is O(M*N*K^2) worst case (O(M*N*K log K)
with vectorized sorting); the fitted exponent should stay well below 3."""

import argparse
import time

import numpy as np

from seisrate.model import generate_rayleigh
from seisrate.rates import EvaluationMode
from seisrate.search import SearchBudget, run_algorithm


def time_once(algo, k, n, m, iters, seed):
    channel = generate_rayleigh(k, n, 1e-3, 1e-3, seed)
    budget = SearchBudget(m, iters, seed=seed)
    t0 = time.perf_counter()
    run_algorithm(algo, channel, budget)
    return (time.perf_counter() - t0) / iters


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--algo", default="as")
    parser.add_argument("--gws", type=int, default=4)
    parser.add_argument("--particles", "-M", type=int, default=50)
    parser.add_argument("--iters", "-I", type=int, default=50)
    parser.add_argument("--gp-counts", type=int, nargs="+",
                        default=[20, 40, 80, 160, 320, 640])
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    print(f"{args.algo}, N={args.gws}, M={args.particles}, "
          f"I={args.iters} (per-iteration seconds, best of {args.repeats})")
    costs = []
    for k in args.gp_counts:
        best = min(time_once(args.algo, k, args.gws, args.particles,
                             args.iters, rep) for rep in range(args.repeats))
        costs.append(best)
        print(f"  K={k:>5}: {best * 1e3:9.3f} ms/iteration")
    slope = np.polyfit(np.log(args.gp_counts), np.log(costs), 1)[0]
    print(f"\nfitted log-log slope in K: {slope:.2f} "
          f"(polynomial; quadratic bound corresponds to 2.0)")


if __name__ == "__main__":
    main()
