#!/usr/bin/env python3
"""Run the finite-state oracle: operator identities plus certified bound
domination on a batch of random two-block models, writing a text report.

Usage:
    python3 scripts/run_finite_verify.py [--models N] [--out DIR] [--seed S]
"""
import argparse
import sys

from wpgibbs.cli import main


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--models", type=int, default=50)
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--states", default="4x4")
    parser.add_argument("--n-max", type=int, default=200)
    parser.add_argument("--out", default="out/finite_verify")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    return main(
        [
            "verify",
            "--models", str(args.models),
            "--trials", str(args.trials),
            "--states", args.states,
            "--n-max", str(args.n_max),
            "--out", args.out,
            "--seed", str(args.seed),
            "--verbose",
        ]
    )


if __name__ == "__main__":
    sys.exit(run())
