"""Reproduce the four result tables at full budget.

    python3 scripts/run_tables.py --out results/tables --seed 0

Population 50, 200 generations, two seeds per GA cell and two restarts per
LMI row. Takes roughly ten minutes on one core.
"""
import argparse
import logging
import time

from qcoherent.tables import TableConfig, reproduce_tables


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/tables")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n-seeds", type=int, default=2)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    t0 = time.perf_counter()
    paths = reproduce_tables(args.out, TableConfig(seed=args.seed, n_seeds=args.n_seeds))
    for name, p in paths.items():
        print(f"--- {name} ({p})")
        print(p.read_text(), end="")
    print(f"total {time.perf_counter() - t0:.0f} s")


if __name__ == "__main__":
    main()
