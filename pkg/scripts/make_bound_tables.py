"""Emit the log-sum-exp / softmax identity tables for several inverse
temperatures, mirroring the n-vs-beta layout of the numerical study.

Usage: python scripts/make_bound_tables.py [--seed 0] [--out runs/bound-tables]
"""

import argparse
from pathlib import Path

from gaclab.cli import main as cli_main


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="runs/bound-tables")
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for beta in ("0.01", "1", "100"):
        dest = out / f"bound_table_beta{beta}.csv"
        cli_main(
            [
                "bound-table",
                "--n", "10,100,1000,10000,100000,1000000",
                "--beta", beta,
                "--seed", str(args.seed),
                "--out", str(dest),
            ]
        )


if __name__ == "__main__":
    main()
