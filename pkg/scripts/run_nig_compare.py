#!/usr/bin/env python3
"""Certified bound vs paired-chain empirical decay for the normal-inverse
Gamma two-block sampler with scaled Metropolis steps.

Writes compare.csv (n, bound, empirical mean, CI) and metadata including the
fraction of grid points where the bound dominates the empirical upper CI.

Usage:
    python3 scripts/run_nig_compare.py [--starts N] [--out DIR] [--seed S]
"""
import argparse
import sys

from wpgibbs.cli import main


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--starts", type=int, default=50000)
    parser.add_argument("--beta-hyper", type=float, default=2.0)
    parser.add_argument("--n-grid", default="1,2,5,10,20,50,100,200")
    parser.add_argument("--out", default="out/nig_compare")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    return main(
        [
            "compare",
            "--case", "nig",
            "--mode", "scaled",
            "--beta-hyper", str(args.beta_hyper),
            "--starts", str(args.starts),
            "--n-grid", args.n_grid,
            "--out", args.out,
            "--seed", str(args.seed),
        ]
    )


if __name__ == "__main__":
    sys.exit(run())
