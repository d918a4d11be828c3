import json
from importlib import resources

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import random_slh
from qcoherent import io as qio
from qcoherent.closedloop import build_controller_from_slh
from qcoherent.lmi import lift_controller, verify_candidate
from qcoherent.model import slh_to_quadrature
from qcoherent.performance import evaluate
from qcoherent.registry import cavity, dpa


def _same(a, b):
    return a.dtype == b.dtype and a.shape == b.shape and np.array_equal(a, b)


def _through_text(d):
    return json.loads(json.dumps(d))


@given(st.integers(0, 2**31 - 1))
def test_matrix_round_trip_is_exact(seed):
    r = np.random.default_rng(seed)
    X = r.normal(size=(3, 4)) * 10.0 ** r.integers(-300, 300, size=(3, 4))
    Zc = X + 1j * r.normal(size=(3, 4))
    assert _same(qio.decode_matrix(_through_text(qio.encode_matrix(X))), X)
    assert _same(qio.decode_matrix(_through_text(qio.encode_matrix(Zc))), Zc)


def test_complex_entries_are_pairs():
    assert qio.encode_matrix([[1 + 2j, 3.0]]) == [[[1.0, 2.0], [3.0, 0.0]]]


@given(st.integers(0, 2**31 - 1), st.booleans())
def test_slh_and_quadrature_round_trip(seed, passive):
    p = random_slh(np.random.default_rng(seed), passive=passive)
    back = qio.slh_from_dict(_through_text(qio.slh_to_dict(p)))
    for f in qio.SLH_FIELDS:
        a, b = getattr(p, f), getattr(back, f)
        assert (a is None and b is None) or np.array_equal(a, b)
    q = slh_to_quadrature(p)
    q2 = qio.quadrature_from_dict(_through_text(qio.quadrature_to_dict(q)))
    assert all(np.array_equal(getattr(q, f), getattr(q2, f)) for f in qio.QUADRATURE_FIELDS)


def test_plant_round_trip_and_packaged_files():
    for make in (cavity, dpa):
        p = make()
        back = qio.plant_from_dict(_through_text(qio.plant_to_dict(p)))
        assert back.name == p.name
        stored = qio.plant_from_dict(json.loads(resources.files("qcoherent").joinpath(f"data/{p.name}.json").read_text()))
        for f in qio.PLANT_FIELDS:
            assert _same(getattr(back, f), getattr(p, f))
            assert _same(getattr(stored, f), getattr(p, f))


def test_controller_record_reproduces_indices(tmp_path, rng):
    slh = random_slh(rng, passive=True)
    k = build_controller_from_slh(slh)
    coupling = (np.array([[0.2 - 0.1j]]), np.zeros((1, 1)))
    rep = evaluate(dpa(), k, coupling)
    qio.dump(qio.controller_to_dict(k, coupling, slh, rep, {"seed": 3}), tmp_path / "k.json")
    d = qio.load(tmp_path / "k.json")
    k2, c2 = qio.controller_from_dict(d)
    assert all(np.array_equal(getattr(k, f), getattr(k2, f)) for f in qio.CONTROLLER_FIELDS)
    rep2 = evaluate(dpa(), k2, c2)
    assert rep2.J_lqg == d["report"]["J_lqg"] and rep2.Hinf == d["report"]["Hinf"]


def test_candidate_and_verification_round_trip(tmp_path):
    k = build_controller_from_slh(random_slh(np.random.default_rng(5), passive=True))
    c = lift_controller(cavity(), k, None)
    rep = verify_candidate(c, cavity(), 10.0, None)
    qio.dump({"c": qio.candidate_to_dict(c), "r": qio.verification_to_dict(rep)}, tmp_path / "c.json")
    d = qio.load(tmp_path / "c.json")
    c2, rep2 = qio.candidate_from_dict(d["c"]), qio.verification_from_dict(d["r"])
    assert np.array_equal(c2.Z, c.Z) and c2.n == c.n
    assert rep2 == rep and d["r"]["checks"] == rep.checks


def test_wrong_kind_rejected():
    with pytest.raises(ValueError):
        qio.controller_from_dict({"kind": "plant"})
    with pytest.raises(ValueError):
        qio.plant_from_dict({"kind": "controller"})
    with pytest.raises(ValueError):
        qio.plant_from_dict({"kind": "plant", "A": [[1.0]]})
