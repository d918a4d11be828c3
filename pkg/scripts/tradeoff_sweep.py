"""H-infinity versus LQG trade-off on one plant.

For each upper bound ``gamma_l`` the GA minimises H-inf subject to
``J in [1, gamma_l]``. Writes a CSV of (gamma_l, J, H-inf) with one row per
bound; as the LQG bound loosens the achievable H-inf should drop.

    python3 scripts/tradeoff_sweep.py --plant cavity --mode passive --out tradeoff.csv
"""
import argparse

import numpy as np

from qcoherent.ga import GAConfig, NoFeasibleError, SearchSpace, fix_lqg, run_ga
from qcoherent.registry import PLANTS
from qcoherent.tables import to_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--plant", choices=sorted(PLANTS), default="cavity")
    ap.add_argument("--mode", default="passive")
    ap.add_argument("--bounds", type=float, nargs="+", default=list(np.round(np.geomspace(1.001, 3.0, 8), 4)))
    ap.add_argument("--pop", type=int, default=40)
    ap.add_argument("--gens", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args()

    plant, space = PLANTS[args.plant](), SearchSpace(mode=args.mode)
    rows = []
    for gl in args.bounds:
        cfg = GAConfig(population_size=args.pop, generations=args.gens, rng_seed=args.seed,
                       objective="hinf", constraint=fix_lqg(1.0, gl))
        try:
            r = run_ga(plant, space, cfg)
            rows.append([gl, r.report.J_lqg, r.report.Hinf])
        except NoFeasibleError:
            rows.append([gl, None, None])
        print(*rows[-1], sep="\t", flush=True)
    text = to_csv(["gamma_l", "lqg", "hinf"], rows)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        print(text, end="")


if __name__ == "__main__":
    main()
