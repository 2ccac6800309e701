#!/usr/bin/env python3
"""Run the drift-parameter data-augmentation sampler for a discretely
observed Ornstein-Uhlenbeck path and write per-chain traces plus the
certified rate-bound curve for the same setup.

Usage:
    python3 scripts/run_ou_traces.py [--config FILE] [--chains N] [--out DIR]
"""
import argparse
import json
import os
import sys
import tempfile

from wpgibbs.cli import main

DEFAULT_CONFIG = {
    "case": "ou",
    "mu0": 0.5,
    "tau0": 1.0,
    "times": [0.0, 0.5, 1.0, 1.5, 2.0],
    "obs": [0.2, 0.1, 0.3, -0.1, 0.2],
    "M": 32,
}


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=None)
    parser.add_argument("--chains", type=int, default=4)
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--out", default="out/ou_traces")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    config = args.config
    tmp = None
    if config is None:
        fd, tmp = tempfile.mkstemp(suffix=".json")
        with os.fdopen(fd, "w") as fh:
            json.dump(DEFAULT_CONFIG, fh)
        config = tmp
    try:
        rc = main(
            [
                "sample",
                "--case", "ou",
                "--config", config,
                "--chains", str(args.chains),
                "--steps", str(args.steps),
                "--out", args.out,
                "--seed", str(args.seed),
            ]
        )
        if rc == 0:
            rc = main(
                [
                    "bound",
                    "--case", "ou",
                    "--config", config,
                    "--n-max", "200",
                    "--out", os.path.join(args.out, "bound"),
                ]
            )
        return rc
    finally:
        if tmp is not None:
            os.unlink(tmp)


if __name__ == "__main__":
    sys.exit(run())
