#!/usr/bin/env python3
"""Sweep geophone counts against gateway counts and report, for each
gateway count, the largest deployment whose average per-geophone rate
still meets the required kbps (default 144 kbps at 200 kHz)."""

import argparse

from seisrate.experiments import GwSizingSpec, run_gw_sizing


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--gp-counts", type=int, nargs="+",
                        default=[10, 20, 30, 40, 60, 80, 100])
    parser.add_argument("--gw-counts", type=int, nargs="+",
                        default=[2, 4, 6, 8])
    parser.add_argument("--algorithm", default="as")
    parser.add_argument("--particles", "-M", type=int, default=30)
    parser.add_argument("--iters", "-I", type=int, default=30)
    parser.add_argument("--replications", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--scenario", type=int, choices=(1, 2), default=1)
    parser.add_argument("--required-kbps", type=float, default=144.0)
    parser.add_argument("--bandwidth-khz", type=float, default=200.0)
    parser.add_argument("--out", default="results/gw_sizing")
    args = parser.parse_args()

    spec = GwSizingSpec(
        gp_counts=tuple(args.gp_counts),
        gw_counts=tuple(args.gw_counts),
        algorithm=args.algorithm,
        budget=(args.particles, args.iters),
        replications=args.replications,
        master_seed=args.seed,
        scenario=args.scenario,
        required_kbps=args.required_kbps,
        bandwidth_khz=args.bandwidth_khz,
        output_dir=args.out,
    )
    rows, supported = run_gw_sizing(spec)
    print(f"{'N gateways':>11}{'K geophones':>13}{'mean sum-rate':>15}"
          f"{'per-GP kbps':>13}")
    for _, n, k, _, mean_sum, kbps, _ in rows:
        print(f"{n:>11}{k:>13}{float(mean_sum):>15.3f}{float(kbps):>13.1f}")
    print(f"\nlargest supported deployment at {args.required_kbps} kbps:")
    for n, k in supported.items():
        print(f"  {n} gateways -> {k if k is not None else 'none'} geophones")


if __name__ == "__main__":
    main()
