#!/usr/bin/env python3
"""Compare ant-system search with and without the gain-based prior (and
its geophone-deactivation variant) against the decode-all baseline on
large networks, reporting means and a paired significance test."""

import argparse

import numpy as np
from scipy import stats

from seisrate.model import generate_rayleigh
from seisrate.rates import EvaluationMode
from seisrate.search import (
    AcoParams,
    SearchBudget,
    ant_system,
    no_optimization_baseline,
)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--gps", type=int, default=40)
    parser.add_argument("--gws", type=int, default=4)
    parser.add_argument("--particles", "-M", type=int, default=100)
    parser.add_argument("--iters", "-I", type=int, default=40)
    parser.add_argument("--replications", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--scenario", type=int, choices=(1, 2), default=2)
    args = parser.parse_args()

    mode = EvaluationMode.scenario(args.scenario)
    variants = {
        "prior+deactivation": AcoParams(
            heuristic_mode="gw-average+gp-deactivation"),
        "prior": AcoParams(heuristic_mode="gw-average"),
        "no prior": AcoParams(heuristic_mode="none"),
    }
    results = {name: [] for name in variants}
    results["decode-all baseline"] = []
    for rep in range(args.replications):
        channel = generate_rayleigh(args.gps, args.gws, 1e-3, 1e-3,
                                    args.seed * 1_000_003 + rep)
        budget = SearchBudget(args.particles, args.iters,
                              seed=args.seed * 7_000_003 + rep)
        for name, params in variants.items():
            trace = ant_system(channel, budget, params, mode)
            results[name].append(trace.best_sum_rate)
        results["decode-all baseline"].append(
            no_optimization_baseline(channel, mode)[1])

    print(f"scenario {args.scenario}, K={args.gps}, N={args.gws}, "
          f"M={args.particles}, I={args.iters}, "
          f"{args.replications} replications\n")
    for name, values in results.items():
        print(f"{name:<22} mean {np.mean(values):.4f}  std {np.std(values):.4f}")
    ref = results["prior+deactivation"]
    print()
    for name in ("prior", "no prior", "decode-all baseline"):
        diff = np.array(ref) - np.array(results[name])
        t_stat, p_two = stats.ttest_rel(ref, results[name])
        p_one = p_two / 2 if t_stat > 0 else 1 - p_two / 2
        print(f"prior+deactivation vs {name}: mean gain {diff.mean():+.4f}, "
              f"one-sided p = {p_one:.3g}")


if __name__ == "__main__":
    main()
