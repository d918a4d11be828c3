"""Command-line front end.

Subcommands: ``evaluate``, ``synthesize-ga``, ``synthesize-lmi`` and
``reproduce-tables``. A ``--config`` JSON file supplies defaults that
explicit flags override. Exit codes: 0 success, 2 no feasible/verified
solution, 3 invalid configuration.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import io as qio
from .closedloop import PlantModel
from .ga import GAConfig, Mode, NoFeasibleError, SearchSpace, fix_hinf, fix_lqg, run_ga
from .lmi import APConfig, alternating_projection_solve, build_modified_plant, verify_candidate
from .performance import evaluate
from .registry import PLANTS
from .tables import GA_HEADER, TableConfig, reproduce_tables, to_csv

EXIT_OK, EXIT_INFEASIBLE, EXIT_CONFIG = 0, 2, 3

log = logging.getLogger("qcoherent")


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def load_plant(name: str) -> PlantModel:
    if name in PLANTS:
        return PLANTS[name]()
    path = Path(name)
    if not path.is_file():
        raise ConfigError(f"unknown plant {name!r} (not a registry name or an existing file)")
    try:
        return qio.load_plant(path)
    except (ValueError, KeyError, json.JSONDecodeError) as e:
        raise ConfigError(f"bad plant file {name}: {e}") from e


def _positive(name, v):
    if v is not None and not v > 0:
        raise ConfigError(f"{name} must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of defaults (flags override)")
    common.add_argument("--plant", help="cavity, dpa or a plant JSON file")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output file (or directory for reproduce-tables)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="qcoherent", description="Coherent LQG / H-infinity controller synthesis")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ev = sub.add_parser("evaluate", parents=[common], help="indices of a stored controller")
    ev.add_argument("--controller", help="controller JSON written by a synthesis run")

    ga = sub.add_parser("synthesize-ga", parents=[common], help="genetic-algorithm synthesis")
    ga.add_argument("--mode", choices=[m.value for m in Mode])
    ga.add_argument("--objective", choices=["lqg", "hinf"])
    ga.add_argument("--gamma-l", type=float, help="keep J in [0, gamma_l] while minimising H-inf")
    ga.add_argument("--gamma-inf", type=float, help="keep H-inf in [0, gamma_inf] while minimising J")
    ga.add_argument("--pop", type=int)
    ga.add_argument("--gens", type=int)
    ga.add_argument("--trace", help="write the per-generation trace CSV here")

    lm = sub.add_parser("synthesize-lmi", parents=[common], help="rank-constrained LMI heuristic")
    lm.add_argument("--gamma-l", type=float)
    lm.add_argument("--gamma-inf", type=float)
    lm.add_argument("--restarts", type=int)
    lm.add_argument("--max-iter", type=int)

    rt = sub.add_parser("reproduce-tables", parents=[common], help="write table1..4.csv")
    rt.add_argument("--pop", type=int)
    rt.add_argument("--gens", type=int)
    rt.add_argument("--n-seeds", type=int)
    rt.add_argument("--restarts", type=int, help="LMI restarts per table-3 row")
    rt.add_argument("--max-iter", type=int, help="LMI outer iterations per restart")
    return p


DEFAULTS = {
    "plant": "cavity", "seed": 0, "out": None, "controller": None, "mode": "passive",
    "objective": None, "gamma_l": None, "gamma_inf": None, "pop": 50, "gens": 200,
    "trace": None, "restarts": 2, "max_iter": 10, "n_seeds": 2, "verbose": False,
}


def resolve(args: argparse.Namespace) -> dict:
    """Merge built-in defaults, the config file and explicit flags (in that order)."""
    cfg = dict(DEFAULTS)
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file {args.config} does not exist")
        try:
            file_cfg = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file is not valid JSON: {e}") from e
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(file_cfg) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        cfg.update(file_cfg)
    for k, v in vars(args).items():
        if k in ("command", "config") or v is None or v is False:
            continue
        cfg[k] = v
    _positive("gamma_l", cfg["gamma_l"])
    _positive("gamma_inf", cfg["gamma_inf"])
    for k in ("pop", "gens", "restarts", "max_iter", "n_seeds"):
        if not isinstance(cfg[k], int) or cfg[k] < 1:
            raise ConfigError(f"{k} must be a positive integer")
    return cfg


def cmd_evaluate(cfg: dict) -> int:
    plant = load_plant(cfg["plant"])
    if not cfg["controller"] or not Path(cfg["controller"]).is_file():
        raise ConfigError("--controller must name an existing controller file")
    try:
        k, coupling = qio.controller_from_dict(qio.load(cfg["controller"]))
    except (ValueError, KeyError, json.JSONDecodeError) as e:
        raise ConfigError(f"bad controller file: {e}") from e
    rep = evaluate(plant, k, coupling)
    sys.stdout.write(to_csv(["plant", "stable", "hinf", "lqg"], [[plant.name, rep.stable, rep.Hinf, rep.J_lqg]]))
    if cfg["out"]:
        # full precision, for comparison with the report stored by the synthesis run
        qio.dump({"kind": "report", "plant": plant.name, "stable": rep.stable, "J_lqg": rep.J_lqg,
                  "Hinf": rep.Hinf}, cfg["out"])
    return EXIT_OK if rep.stable else EXIT_INFEASIBLE


def cmd_ga(cfg: dict) -> int:
    plant = load_plant(cfg["plant"])
    objective = cfg["objective"] or ("hinf" if cfg["gamma_l"] is not None else "lqg")
    constraint = None
    if objective == "hinf" and cfg["gamma_l"] is not None:
        constraint = fix_lqg(0.0, cfg["gamma_l"])
    elif objective == "lqg" and cfg["gamma_inf"] is not None:
        constraint = fix_hinf(0.0, cfg["gamma_inf"])
    try:
        space = SearchSpace(mode=cfg["mode"])
        ga_cfg = GAConfig(population_size=cfg["pop"], generations=cfg["gens"], rng_seed=cfg["seed"],
                          objective=objective, constraint=constraint)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    try:
        r = run_ga(plant, space, ga_cfg)
    except NoFeasibleError as e:
        log.error("%s", e)
        return EXIT_INFEASIBLE
    label = "none" if constraint is None else f"{constraint.index}[{constraint.lo:g},{constraint.hi:g}]"
    row = [plant.name, space.mode.value, objective, label, r.report.Hinf, r.report.J_lqg, r.seed, "ok"]
    sys.stdout.write(to_csv(GA_HEADER, [row]))
    if cfg["out"]:
        meta = {"mode": space.mode.value, "objective": objective, "seed": r.seed, "plant": plant.name}
        qio.dump(qio.controller_to_dict(r.controller, r.coupling, r.slh, r.report, meta), cfg["out"])
    if cfg["trace"]:
        Path(cfg["trace"]).write_text(r.trace_csv())
    return EXIT_OK


def cmd_lmi(cfg: dict) -> int:
    plant = load_plant(cfg["plant"])
    gl, gi = cfg["gamma_l"], cfg["gamma_inf"]
    if gl is None and gi is None:
        raise ConfigError("synthesize-lmi needs --gamma-l and/or --gamma-inf")
    ap = APConfig(seed=cfg["seed"], restarts=cfg["restarts"], max_iter=cfg["max_iter"])
    cand = alternating_projection_solve(plant, gl, gi, ap)
    rep = verify_candidate(cand, plant, gl, gi)
    checks = ";".join(f"{k}={'pass' if v else 'fail'}" for k, v in rep.checks.items())
    sys.stdout.write(to_csv(["plant", "gamma_inf", "gamma_l", "hinf", "lqg", "verified", "checks"],
                            [[plant.name, gi, gl, rep.Hinf, rep.J_lqg, rep.passed, checks]]))
    if cfg["out"]:
        out = Path(cfg["out"])
        qio.dump({"kind": "lmi_run", "candidate": qio.candidate_to_dict(cand),
                  "verification": qio.verification_to_dict(rep)}, out.with_suffix(".candidate.json"))
        if rep.passed:
            mp = build_modified_plant(plant)
            k = cand.variables(mp).controller(mp)
            meta = {"gamma_l": gl, "gamma_inf": gi, "seed": cfg["seed"], "plant": plant.name}
            qio.dump(qio.controller_to_dict(k, None, None, evaluate(plant, k), meta), out)
    return EXIT_OK if rep.passed else EXIT_INFEASIBLE


def cmd_tables(cfg: dict) -> int:
    tc = TableConfig(seed=cfg["seed"], n_seeds=cfg["n_seeds"], population_size=cfg["pop"], generations=cfg["gens"])
    tc = replace(tc, lmi=replace(tc.lmi, restarts=cfg["restarts"], max_iter=cfg["max_iter"]))
    paths = reproduce_tables(cfg["out"] or "tables", tc)
    for name, p in paths.items():
        print(f"{name}: {p}")
    return EXIT_OK


COMMANDS = {"evaluate": cmd_evaluate, "synthesize-ga": cmd_ga, "synthesize-lmi": cmd_lmi,
            "reproduce-tables": cmd_tables}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
        logging.basicConfig(level=logging.INFO if cfg["verbose"] else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](cfg)
    except ConfigError as e:
        print(f"qcoherent: invalid configuration: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
