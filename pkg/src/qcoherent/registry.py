"""Example systems: the three-channel optical cavity, the DPA and the small Riccati example."""
from __future__ import annotations

import numpy as np

from .closedloop import PlantModel
from .model import SLHParams
from .numerics import RiccatiInputs

I2 = np.eye(2)
Z2 = np.zeros((2, 2))

CAVITY_KAPPA = (2.6, 0.2, 0.2)
DPA_KAPPA = (0.2, 0.2, 0.5)
DPA_EPS = 0.01


def cavity(kappa=CAVITY_KAPPA) -> PlantModel:
    k1, k2, k3 = kappa
    gamma = k1 + k2 + k3
    return PlantModel(
        A=-gamma / 2 * I2,
        B0=-np.sqrt(k1) * I2, B1=-np.sqrt(k2) * I2, B2=-np.sqrt(k3) * I2,
        C2=np.sqrt(k2) * I2, D20=Z2, D21=I2,
        C1=np.sqrt(k3) * I2, D12=I2,
        Cz=I2, Dz=I2,
        name="cavity",
    )


def cavity_slh(kappa=CAVITY_KAPPA) -> SLHParams:
    """Cavity coupled to channels ``(v, w, u)`` with rates ``kappa``."""
    return SLHParams.passive(np.sqrt(np.asarray(kappa, dtype=float)).reshape(3, 1))


def dpa(kappa=DPA_KAPPA, eps=DPA_EPS) -> PlantModel:
    k1, k2, k3 = kappa
    gamma = k1 + k2 + k3
    return PlantModel(
        A=-0.5 * np.diag([gamma - eps, gamma + eps]),
        B0=-np.sqrt(k3) * I2, B1=-np.sqrt(k1) * I2, B2=-np.sqrt(k2) * I2,
        C2=np.sqrt(k3) * I2, D20=I2, D21=Z2,
        C1=np.sqrt(k2) * I2, D12=I2,
        Cz=I2, Dz=I2,
        name="dpa",
    )


def dpa_slh(kappa=DPA_KAPPA, eps=DPA_EPS) -> SLHParams:
    """DPA with channels ``(v, w, u)`` at rates ``(k3, k1, k2)`` and pump ``Omega_+ = i eps / 2``."""
    k1, k2, k3 = kappa
    return SLHParams(
        S=np.eye(3),
        C_minus=np.sqrt([[k3], [k1], [k2]]),
        C_plus=np.zeros((3, 1)),
        Omega_minus=np.zeros((1, 1)),
        Omega_plus=np.array([[0.5j * eps]]),
    )


def remark4(delta: float, gamma_inf: float | None = None) -> RiccatiInputs:
    """Riccati data of the DPA-like example whose measurement sees the disturbance through ``delta``.

    Only the disturbance channel ``w`` enters ``(B1, D21)``; the filter
    equation then reduces to the 2x2 quadratic matrix equation whose
    diagonal solutions are :func:`remark4_closed_form`.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if gamma_inf is None:
        gamma_inf = 2 * np.sqrt(0.4) * delta
    return RiccatiInputs(
        A=-0.5 * np.diag([0.89, 0.91]),
        B1=-np.sqrt(0.2) * I2,
        B2=-np.sqrt(0.2) * I2,
        C1=np.sqrt(0.2) * I2,
        C2=np.sqrt(0.5) * I2,
        D12=I2,
        D21=delta * I2,
        gamma_inf=gamma_inf,
    )


def remark4_closed_form(delta: float, gamma_inf: float) -> list[np.ndarray]:
    """All diagonal solutions ``Y = diag(y1, y3)`` of the filter Riccati equation.

    With ``y2 = 0`` each diagonal entry is either zero or
    ``(a_i - 2 sqrt(0.1) / delta) / (0.2 / gamma^2 - 0.5 / delta^2)`` with
    ``a = (0.89, 0.91)``; ``y2 != 0`` admits no solution.
    """
    denom = 0.2 / gamma_inf**2 - 0.5 / delta**2
    roots = [(a - 2 * np.sqrt(0.1) / delta) / denom for a in (0.89, 0.91)]
    return [np.diag([y1, y3]) for y1 in (0.0, roots[0]) for y3 in (0.0, roots[1])]


PLANTS = {"cavity": cavity, "dpa": dpa}


def registry() -> dict:
    return {"cavity": cavity(), "dpa": dpa(), "remark4": remark4}
