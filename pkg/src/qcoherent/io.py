"""JSON round-tripping for plants, controllers and synthesis results.

Floats are written with ``repr`` (shortest round-trip form), so a saved
object reloads bit-for-bit. Complex entries are stored as ``[re, im]``.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .closedloop import ControllerRealization, PlantModel
from .lmi import CandidateSolution, VerificationReport
from .model import QuadratureSystem, SLHParams

PLANT_FIELDS = ("A", "B0", "B1", "B2", "C2", "D20", "D21", "C1", "D12", "Cz", "Dz", "Theta")
CONTROLLER_FIELDS = ("Ak", "Bk1", "Bk2", "Bk3", "Ck", "Theta_k")
SLH_FIELDS = ("S", "C_minus", "C_plus", "Omega_minus", "Omega_plus", "K_minus", "K_plus")
QUADRATURE_FIELDS = ("A", "B", "C", "D", "Theta")


def encode_matrix(X) -> list:
    X = np.atleast_2d(np.asarray(X))
    if np.iscomplexobj(X):
        return [[[float(z.real), float(z.imag)] for z in row] for row in X]
    return [[float(x) for x in row] for row in X]


def decode_matrix(rows) -> np.ndarray:
    a = np.asarray(rows, dtype=float)
    if a.ndim == 3:
        return a[..., 0] + 1j * a[..., 1]
    return np.atleast_2d(a)


def plant_to_dict(p: PlantModel) -> dict:
    d = {"kind": "plant", "name": p.name}
    d.update({f: encode_matrix(getattr(p, f)) for f in PLANT_FIELDS})
    return d


def plant_from_dict(d: dict) -> PlantModel:
    if d.get("kind", "plant") != "plant":
        raise ValueError(f"not a plant record: {d.get('kind')!r}")
    missing = [f for f in PLANT_FIELDS if f != "Theta" and f not in d]
    if missing:
        raise ValueError(f"plant record lacks {missing}")
    kw = {f: decode_matrix(d[f]) for f in PLANT_FIELDS if d.get(f) is not None}
    return PlantModel(name=d.get("name", "plant"), **kw)


def slh_to_dict(p: SLHParams) -> dict:
    return {f: None if getattr(p, f) is None else encode_matrix(getattr(p, f)) for f in SLH_FIELDS}


def slh_from_dict(d: dict) -> SLHParams:
    return SLHParams(**{f: None if d.get(f) is None else decode_matrix(d[f]) for f in SLH_FIELDS})


def quadrature_to_dict(q: QuadratureSystem) -> dict:
    d = {"kind": "quadrature"}
    d.update({f: encode_matrix(getattr(q, f)) for f in QUADRATURE_FIELDS})
    return d


def quadrature_from_dict(d: dict) -> QuadratureSystem:
    if d.get("kind") != "quadrature":
        raise ValueError(f"not a quadrature record: {d.get('kind')!r}")
    return QuadratureSystem(**{f: decode_matrix(d[f]) for f in QUADRATURE_FIELDS})


def controller_to_dict(k: ControllerRealization, coupling=None, slh: SLHParams | None = None,
                       report=None, meta: dict | None = None) -> dict:
    d = {"kind": "controller"}
    d.update({f: encode_matrix(getattr(k, f)) for f in CONTROLLER_FIELDS})
    d["coupling"] = None if coupling is None else [encode_matrix(K) for K in coupling]
    d["slh"] = None if slh is None else slh_to_dict(slh)
    d["report"] = None if report is None else {"stable": report.stable, "J_lqg": report.J_lqg, "Hinf": report.Hinf}
    d["meta"] = meta or {}
    return d


def controller_from_dict(d: dict) -> tuple[ControllerRealization, tuple | None]:
    if d.get("kind") != "controller":
        raise ValueError(f"not a controller record: {d.get('kind')!r}")
    k = ControllerRealization(**{f: decode_matrix(d[f]) for f in CONTROLLER_FIELDS})
    coupling = None if d.get("coupling") is None else tuple(decode_matrix(K) for K in d["coupling"])
    return k, coupling


def candidate_to_dict(c: CandidateSolution) -> dict:
    return {"kind": "candidate", "Z": encode_matrix(c.Z), "n": c.n, "residual": c.residual,
            "history": list(map(float, c.history)), "initial_residual": c.initial_residual,
            "converged": c.converged, "iterations": c.iterations, "restart": c.restart}


def candidate_from_dict(d: dict) -> CandidateSolution:
    if d.get("kind") != "candidate":
        raise ValueError(f"not a candidate record: {d.get('kind')!r}")
    kw = {k: v for k, v in d.items() if k not in ("kind", "Z")}
    return CandidateSolution(Z=decode_matrix(d["Z"]), **kw)


def verification_to_dict(r: VerificationReport) -> dict:
    d = {"kind": "verification", **{f: getattr(r, f) for f in r.__dataclass_fields__}}
    d["pr_residuals"] = list(r.pr_residuals)
    d["checks"] = r.checks
    d["passed"] = r.passed
    return d


def verification_from_dict(d: dict) -> VerificationReport:
    if d.get("kind") != "verification":
        raise ValueError(f"not a verification record: {d.get('kind')!r}")
    kw = {f: d[f] for f in VerificationReport.__dataclass_fields__}
    kw["pr_residuals"] = tuple(kw["pr_residuals"])
    return VerificationReport(**kw)


def dump(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1) + "\n")


def load(path) -> dict:
    return json.loads(Path(path).read_text())


def load_plant(path) -> PlantModel:
    return plant_from_dict(load(path))
