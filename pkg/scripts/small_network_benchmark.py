#!/usr/bin/env python3
"""Benchmark the five metaheuristics against exhaustive search on small
8x2 networks at three computational budgets (the budget-degradation
regime).  Writes traces.csv / summary.csv and prints mean sum-rates."""

import argparse
import csv
from pathlib import Path

from seisrate.experiments import ExperimentSpec, run_experiment


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--gps", type=int, default=8)
    parser.add_argument("--gws", type=int, default=2)
    parser.add_argument("--replications", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--scenario", type=int, choices=(1, 2), default=1)
    parser.add_argument("--out", default="results/small_network")
    args = parser.parse_args()

    spec = ExperimentSpec(
        algorithms=("es", "dpso", "ampso", "as", "mmas", "sa"),
        budgets=((10, 600), (10, 60), (1, 60)),
        replications=args.replications,
        master_seed=args.seed,
        scenario=args.scenario,
        num_gps=args.gps,
        num_gws=args.gws,
        output_dir=args.out,
    )
    rows = run_experiment(spec)
    print(f"{'algorithm':<10}{'M':>5}{'I':>6}{'mean sum-rate':>16}{'MSE vs ES':>14}")
    for algo, m, i, _, mean, _, mse in rows:
        mse_text = f"{float(mse):.4f}" if mse else "-"
        print(f"{algo:<10}{m:>5}{i:>6}{float(mean):>16.4f}{mse_text:>14}")
    print(f"\nCSV written under {Path(args.out).resolve()}")


if __name__ == "__main__":
    main()
