import csv
import io
import json

import pytest

from qcoherent import io as qio
from qcoherent.cli import DEFAULTS, build_parser, main, resolve
from qcoherent.registry import cavity

SMALL = ["--pop", "10", "--gens", "4"]


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_ga_then_evaluate_agree(tmp_path, capsys):
    out = tmp_path / "k.json"
    assert main(["synthesize-ga", "--plant", "cavity", "--objective", "hinf", "--gamma-l", "3",
                 "--seed", "1", "--out", str(out), "--trace", str(tmp_path / "t.csv"), *SMALL]) == 0
    row = _rows(capsys.readouterr().out)[0]
    assert row["plant"] == "cavity" and row["constraint"] == "lqg[0,3]" and row["status"] == "ok"
    stored = qio.load(out)["report"]
    assert main(["evaluate", "--plant", "cavity", "--controller", str(out), "--out", str(tmp_path / "r.json")]) == 0
    ev = qio.load(tmp_path / "r.json")
    assert ev["J_lqg"] == pytest.approx(stored["J_lqg"], abs=1e-12)
    assert ev["Hinf"] == pytest.approx(stored["Hinf"], abs=1e-12)
    assert _rows(capsys.readouterr().out)[0]["hinf"] == row["hinf"]
    # header, the initial population and four generations
    assert len((tmp_path / "t.csv").read_text().splitlines()) == 6


def test_plant_from_file(tmp_path, capsys):
    path = tmp_path / "p.json"
    qio.dump(qio.plant_to_dict(cavity()), path)
    assert main(["synthesize-ga", "--plant", str(path), *SMALL]) == 0
    assert _rows(capsys.readouterr().out)[0]["objective"] == "lqg"


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"plant": "dpa", "pop": 20, "seed": 7}))
    args = build_parser().parse_args(["synthesize-ga", "--config", str(cfg), "--seed", "9"])
    r = resolve(args)
    assert (r["plant"], r["pop"], r["seed"], r["gens"]) == ("dpa", 20, 9, DEFAULTS["gens"])


@pytest.mark.parametrize("argv", [
    ["synthesize-ga", "--plant", "nowhere"],
    ["synthesize-ga", "--gamma-l", "-1"],
    ["synthesize-ga", "--pop", "0"],
    ["synthesize-ga", "--pop", "7"],
    ["synthesize-ga", "--config", "missing.json"],
    ["synthesize-lmi"],
    ["evaluate", "--controller", "missing.json"],
    ["frobnicate"],
    ["synthesize-ga", "--mode", "hybrid"],
])
def test_invalid_configuration_exits_3(argv, capsys):
    assert _exit(argv) == 3


def test_unknown_config_key_exits_3(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"population": 5}))
    assert _exit(["synthesize-ga", "--config", str(cfg)]) == 3
    cfg.write_text("{not json")
    assert _exit(["synthesize-ga", "--config", str(cfg)]) == 3


def test_infeasible_ga_exits_2(capsys):
    # J can never drop below 1, so the interval [0, 0.5] is empty
    assert main(["synthesize-ga", "--objective", "hinf", "--gamma-l", "0.5", *SMALL]) == 2


def test_reproduce_tables_small(tmp_path, capsys):
    argv = ["reproduce-tables", "--out", str(tmp_path), "--pop", "4", "--gens", "1", "--n-seeds", "1",
            "--restarts", "1", "--max-iter", "1"]
    assert main(argv) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["table1.csv", "table2.csv", "table3.csv", "table4.csv", "timings.csv"]
    t3 = _rows((tmp_path / "table3.csv").read_text())
    assert len(t3) == 9 and {r["verified"] for r in t3} <= {"true", "false"}


def _exit(argv):
    try:
        return main(argv)
    except SystemExit as e:
        return e.code
