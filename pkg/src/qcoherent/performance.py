"""LQG and H-infinity indices of a closed loop and the relaxed feasibility predicates."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .closedloop import ClosedLoopSystem, ControllerRealization, PlantModel, assemble_closed_loop
from .numerics import NotHurwitzError, hinf_norm, is_hurwitz, solve_lyapunov


class WrongOrderError(ValueError):
    """The LQG lower bound is only established for second-order plant and controller."""


def lqg_index(cl: ClosedLoopSystem) -> float:
    """Steady-state LQG cost ``Tr(Psi P Psi^T)``, ``M P + P M^T + N N^T / 2 = 0``."""
    P = solve_lyapunov(cl.M, 0.5 * cl.N @ cl.N.T).P
    return float(np.trace(cl.Psi @ P @ cl.Psi.T))


def hinf_objective(cl: ClosedLoopSystem, tol: float = 1e-10) -> float:
    return hinf_norm(cl.M, cl.H, cl.Gamma, tol=tol)


def lqg_lower_bound(Cz, Dz, Ck) -> float:
    Cz = np.atleast_2d(np.asarray(Cz, dtype=float))
    Dz = np.atleast_2d(np.asarray(Dz, dtype=float))
    Ck = np.atleast_2d(np.asarray(Ck, dtype=float))
    CtC = Cz.T @ Cz
    DtD = Dz.T @ Dz
    if CtC.shape != (2, 2) or DtD.shape != (2, 2) or Ck.shape != (2, 2):
        raise WrongOrderError("lower bound holds only for order-2 plant and controller")
    c1, c3 = CtC[0, 0], CtC[1, 1]
    d2 = DtD[0, 1]
    ck1, ck2, ck3, ck4 = Ck.ravel()
    return float((c1 + c3) / 2 + d2 * (ck1 * ck3 + ck2 * ck4))


def check_relaxed_lqg(cl: ClosedLoopSystem, gamma_l: float) -> bool:
    if not gamma_l > 0:
        raise ValueError("gamma_l must be positive")
    if not is_hurwitz(cl.M):
        return False
    return lqg_index(cl) < gamma_l


def check_relaxed_hinf(cl: ClosedLoopSystem, gamma_inf: float) -> bool:
    if not gamma_inf > 0:
        raise ValueError("gamma_inf must be positive")
    if not is_hurwitz(cl.M):
        return False
    return hinf_objective(cl) < gamma_inf


def check_relaxed_mixed(cl: ClosedLoopSystem, gamma_l: float, gamma_inf: float) -> bool:
    return check_relaxed_lqg(cl, gamma_l) and check_relaxed_hinf(cl, gamma_inf)


@dataclass(frozen=True)
class PerformanceReport:
    stable: bool
    J_lqg: float | None = None
    Hinf: float | None = None
    lqg_lower_bound: float | None = None

    def __post_init__(self):
        if not self.stable and (self.J_lqg is not None or self.Hinf is not None):
            raise ValueError("an unstable loop has no LQG / H-infinity value")

    def to_record(self) -> dict:
        fmt = lambda x: "" if x is None else f"{x:.9g}"
        return {
            "stable": int(self.stable),
            "J_lqg": fmt(self.J_lqg),
            "Hinf": fmt(self.Hinf),
            "lqg_lower_bound": fmt(self.lqg_lower_bound),
        }


def evaluate(plant: PlantModel, k: ControllerRealization, coupling=None) -> PerformanceReport:
    cl = assemble_closed_loop(plant, k, coupling)
    try:
        bound = lqg_lower_bound(plant.Cz, plant.Dz, k.Ck)
    except WrongOrderError:
        bound = None
    if not is_hurwitz(cl.M):
        return PerformanceReport(stable=False, lqg_lower_bound=bound)
    try:
        return PerformanceReport(True, lqg_index(cl), hinf_objective(cl), bound)
    except NotHurwitzError:
        return PerformanceReport(stable=False, lqg_lower_bound=bound)
