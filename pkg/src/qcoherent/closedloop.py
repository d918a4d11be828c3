"""Plant, coherent controller and their closed-loop interconnection.

Channel conventions: the plant is driven by ``(v, w, u)`` and the
controller by ``(b_vk1, b_vk2, y)``; the controller output ``u`` is the
outgoing field of the ``b_vk1`` channel. The noise vector of the closed
loop is ``(v, w~, b_vk1, b_vk2)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    PRReport,
    QuadratureSystem,
    SLHParams,
    check_physical_realizability,
    direct_coupling_blocks,
    slh_to_quadrature,
    theta,
    to_quadrature,
)


def _real2d(a, shape=None, name="matrix") -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if shape is not None and a.shape != tuple(shape):
        raise ValueError(f"{name} has shape {a.shape}, expected {tuple(shape)}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


@dataclass(frozen=True, eq=False)
class PlantModel:
    A: np.ndarray
    B0: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    C2: np.ndarray
    D20: np.ndarray
    D21: np.ndarray
    C1: np.ndarray
    D12: np.ndarray
    Cz: np.ndarray
    Dz: np.ndarray
    Theta: np.ndarray | None = None
    name: str = "plant"

    def __post_init__(self):
        A = _real2d(self.A, name="A")
        n = A.shape[0]
        if A.shape != (n, n) or n % 2:
            raise ValueError("A must be square with even order")
        B0 = _real2d(self.B0, name="B0")
        B1 = _real2d(self.B1, name="B1")
        B2 = _real2d(self.B2, name="B2")
        for nm, b in (("B0", B0), ("B1", B1), ("B2", B2)):
            if b.shape[0] != n:
                raise ValueError(f"{nm} must have {n} rows")
        nv, nw, nu = B0.shape[1], B1.shape[1], B2.shape[1]
        C2 = _real2d(self.C2, name="C2")
        ny = C2.shape[0]
        C1 = _real2d(self.C1, name="C1")
        Cz = _real2d(self.Cz, name="Cz")
        checked = dict(
            A=A, B0=B0, B1=B1, B2=B2,
            C2=_real2d(C2, (ny, n), "C2"),
            D20=_real2d(self.D20, (ny, nv), "D20"),
            D21=_real2d(self.D21, (ny, nw), "D21"),
            C1=_real2d(C1, (C1.shape[0], n), "C1"),
            D12=_real2d(self.D12, (C1.shape[0], nu), "D12"),
            Cz=_real2d(Cz, (Cz.shape[0], n), "Cz"),
            Dz=_real2d(self.Dz, (Cz.shape[0], nu), "Dz"),
        )
        for k, v in checked.items():
            object.__setattr__(self, k, v)
        object.__setattr__(self, "Theta", theta(n) if self.Theta is None else _real2d(self.Theta, (n, n), "Theta"))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def dims(self) -> dict[str, int]:
        return dict(n=self.n, n_v=self.B0.shape[1], n_w=self.B1.shape[1], n_u=self.B2.shape[1],
                    n_y=self.C2.shape[0], n_inf=self.C1.shape[0], n_l=self.Cz.shape[0])

    def io_system(self) -> tuple[QuadratureSystem, np.ndarray]:
        """The plant as a quadrature system from ``(v, w, u)`` to ``y``, plus the feed-through columns.

        The feed-through columns are those where ``[D20 D21 0]`` has an
        identity block; they are what the physical-realizability check
        compares against.
        """
        B = np.hstack([self.B0, self.B1, self.B2])
        D = np.hstack([self.D20, self.D21, np.zeros((self.C2.shape[0], self.B2.shape[1]))])
        ny = self.C2.shape[0]
        cols = None
        for start in range(0, D.shape[1] - ny + 1, 2):
            if np.allclose(D[:, start:start + ny], np.eye(ny)):
                cols = np.arange(start, start + ny)
                break
        if cols is None:
            raise ValueError("no identity feed-through block from any input channel to y")
        return QuadratureSystem(self.A, B, self.C2, D, self.Theta), cols

    def pr_report(self, tol: float = 1e-9) -> PRReport:
        q, cols = self.io_system()
        return check_physical_realizability(q, tol=tol, output_columns=cols)


@dataclass(frozen=True, eq=False)
class ControllerRealization:
    Ak: np.ndarray
    Bk1: np.ndarray
    Bk2: np.ndarray
    Bk3: np.ndarray
    Ck: np.ndarray
    Theta_k: np.ndarray | None = None

    def __post_init__(self):
        Ak = _real2d(self.Ak, name="Ak")
        nk = Ak.shape[0]
        if Ak.shape != (nk, nk):
            raise ValueError("Ak must be square")
        vals = dict(Ak=Ak)
        for nm in ("Bk1", "Bk2", "Bk3"):
            b = _real2d(getattr(self, nm), name=nm)
            if b.shape[0] != nk:
                raise ValueError(f"{nm} must have {nk} rows")
            vals[nm] = b
        vals["Ck"] = _real2d(self.Ck, (vals["Bk1"].shape[1], nk), "Ck")
        for k, v in vals.items():
            object.__setattr__(self, k, v)
        object.__setattr__(self, "Theta_k", theta(nk) if self.Theta_k is None else _real2d(self.Theta_k, (nk, nk), "Theta_k"))

    @property
    def n(self) -> int:
        return self.Ak.shape[0]

    @property
    def Bwk(self) -> np.ndarray:
        return np.hstack([self.Bk1, self.Bk2, self.Bk3])

    @classmethod
    def zero(cls, n: int, n_u: int = 2, n_vk2: int = 2, n_y: int = 2) -> "ControllerRealization":
        return cls(np.zeros((n, n)), np.zeros((n, n_u)), np.zeros((n, n_vk2)), np.zeros((n, n_y)), np.zeros((n_u, n)))


@dataclass(frozen=True, eq=False)
class ClosedLoopSystem:
    M: np.ndarray
    N: np.ndarray
    H: np.ndarray
    Gamma: np.ndarray
    Pi: np.ndarray
    Psi: np.ndarray


def build_controller_from_slh(p: SLHParams, n_u: int = 2, n_vk2: int = 2, n_y: int = 2) -> ControllerRealization:
    """Quadrature controller realisation of an SLH system with channel groups ``(vk1, vk2, y)``.

    Rows of ``C_minus``/``C_plus`` are ordered vk1 first, then vk2, then y.
    ``S`` must be the identity so that ``du = Ck xi dt + db_vk1``.
    """
    if p.n_channels * 2 != n_u + n_vk2 + n_y:
        raise ValueError(f"SLH has {p.n_channels} channels, partition needs {(n_u + n_vk2 + n_y) // 2}")
    if min(n_u, n_vk2, n_y) <= 0 or any(d % 2 for d in (n_u, n_vk2, n_y)):
        raise ValueError("channel widths must be positive and even")
    if np.linalg.norm(p.S - np.eye(p.n_channels)) > 1e-12:
        raise ValueError("controller scattering matrix must be the identity")
    q = slh_to_quadrature(p)
    return ControllerRealization(
        Ak=q.A,
        Bk1=q.B[:, :n_u],
        Bk2=q.B[:, n_u:n_u + n_vk2],
        Bk3=q.B[:, n_u + n_vk2:],
        Ck=q.C[:n_u, :],
    )


def controller_pr_residual(k: ControllerRealization) -> tuple[float, float]:
    Th = k.Theta_k
    r_a = k.Ak @ Th + Th @ k.Ak.T
    for B in (k.Bk1, k.Bk2, k.Bk3):
        r_a = r_a + B @ theta(B.shape[1]) @ B.T
    r_b = k.Bk1 - Th @ k.Ck.T @ theta(k.Ck.shape[0])
    return float(np.linalg.norm(r_a)), float(np.linalg.norm(r_b))


def project_pr(k: ControllerRealization) -> ControllerRealization:
    """Nearest physically realisable controller keeping ``Bk2, Bk3, Ck``.

    ``Bk1`` is reset to ``Theta_k Ck^T F`` and ``Ak`` moves by the smallest
    Frobenius change satisfying the (affine, in ``Ak``) dynamics condition.
    """
    Th = k.Theta_k
    Bk1 = Th @ k.Ck.T @ theta(k.Ck.shape[0])
    R = -sum(B @ theta(B.shape[1]) @ B.T for B in (Bk1, k.Bk2, k.Bk3))
    E = k.Ak @ Th
    E = E - 0.5 * (E - E.T - R)
    return ControllerRealization(-E @ Th, Bk1, k.Bk2, k.Bk3, k.Ck, Th)


def coupling_drift(K_minus, K_plus) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature drift blocks (plant <- controller, controller <- plant) of a direct coupling.

    ``K`` has shape ``(controller modes, plant modes)``.
    """
    B12, B21 = direct_coupling_blocks(K_minus, K_plus)
    return to_quadrature(B12), to_quadrature(B21)


def assemble_closed_loop(plant: PlantModel, k: ControllerRealization, coupling=None) -> ClosedLoopSystem:
    n, nk = plant.n, k.n
    if k.Bk3.shape[1] != plant.C2.shape[0]:
        raise ValueError("Bk3 width must equal n_y")
    if k.Ck.shape[0] != plant.B2.shape[1]:
        raise ValueError("Ck rows must equal n_u")
    if k.Bk1.shape[1] != plant.B2.shape[1]:
        raise ValueError("Bk1 width must equal n_u")
    nv, nw, nu, nvk2 = plant.B0.shape[1], plant.B1.shape[1], plant.B2.shape[1], k.Bk2.shape[1]

    M = np.block([[plant.A, plant.B2 @ k.Ck], [k.Bk3 @ plant.C2, k.Ak]])
    if coupling is not None:
        G12, G21 = coupling_drift(*coupling)
        if G12.shape != (n, nk):
            raise ValueError(f"coupling K must be {(nk // 2, n // 2)} (controller x plant modes)")
        M = M + np.block([[np.zeros((n, n)), G12], [G21, np.zeros((nk, nk))]])
    N = np.block([
        [plant.B0, plant.B1, plant.B2, np.zeros((n, nvk2))],
        [k.Bk3 @ plant.D20, k.Bk3 @ plant.D21, k.Bk1, k.Bk2],
    ])
    H = np.vstack([plant.B1, k.Bk3 @ plant.D21])
    Gamma = np.hstack([plant.C1, plant.D12 @ k.Ck])
    n_inf = plant.C1.shape[0]
    Pi = np.hstack([np.zeros((n_inf, nv)), np.zeros((n_inf, nw)), plant.D12, np.zeros((n_inf, nvk2))])
    Psi = np.hstack([plant.Cz, plant.Dz @ k.Ck])
    return ClosedLoopSystem(M=M, N=N, H=H, Gamma=Gamma, Pi=Pi, Psi=Psi)
