"""Rank-constrained LMI formulation of mixed LQG / H-infinity coherent synthesis.

The controller variables are mapped through the usual change of variables
(``A_hat, B_hat, C_hat`` with coupling factors ``Sigma Xi^T = I - X Y``),
which makes the performance conditions linear. Physical realisability stays
bilinear; it is made linear by lifting 13 basic and 18 auxiliary matrices
into ``Z = V V^T`` (``V`` stacks ``I, M1..M13, W1..W18``) and demanding
``rank Z <= n``.

Block index map for ``Z`` (each block is ``n x n``)::

    0        identity
    1..13    M1 A_hat, M2..M4 B~k1..B~k3, M5 C_hat, M6 X, M7 Y,
             M8 Xi~ = Xi Theta, M9 Sigma, M10 Xi, M11 Ck,
             M12 A_check = A_hat Sigma^-T, M13 X_check = X Sigma^-T
    14..31   W1..W18

The printed constraints write ``Z_{a,1}`` for the column of ``a`` against
the identity block and ``Z_{1,x6}``/``Z_{1,x7}`` for the row blocks of X and
Y; here both use block 0, so the latter two become symmetry of X and Y.

There is no SDP solver here. :func:`alternating_projection_solve` attacks the
problem heuristically and :func:`verify_candidate` checks any candidate
from scratch.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .closedloop import (
    ControllerRealization,
    PlantModel,
    assemble_closed_loop,
    build_controller_from_slh,
    controller_pr_residual,
    project_pr,
)
from .model import SLHParams, theta
from .numerics import NotHurwitzError, is_hurwitz, solve_lyapunov
from .performance import hinf_objective, lqg_index

log = logging.getLogger(__name__)

N_BASIC = 13
N_LIFT = 18
N_BLOCKS = 1 + N_BASIC + N_LIFT
RANK_RTOL = 1e-8


class ConstraintViolated(ValueError):
    pass


class SingularTransformError(np.linalg.LinAlgError):
    pass


class MaxIterations(RuntimeError):
    """Raised in strict mode when no restart converged; carries the best candidate."""

    def __init__(self, msg, candidate=None):
        super().__init__(msg)
        self.candidate = candidate


def m(i: int) -> int:
    return i


def w(i: int) -> int:
    return N_BASIC + i


@dataclass(frozen=True, eq=False)
class ModifiedPlant:
    """Plant with all white noises stacked as ``(v, w~, b_vk1, b_vk2)`` and output ``y' = (b_vk1, b_vk2, y)``."""

    plant: PlantModel
    n_vk2: int
    Bw: np.ndarray
    C: np.ndarray
    D: np.ndarray
    D_inf: np.ndarray
    Dw: np.ndarray

    @property
    def A(self):
        return self.plant.A

    @property
    def B1(self):
        return self.plant.B1

    @property
    def B2(self):
        return self.plant.B2

    @property
    def C1(self):
        return self.plant.C1

    @property
    def C2(self):
        return self.plant.C2

    @property
    def D12(self):
        return self.plant.D12

    @property
    def Cz(self):
        return self.plant.Cz

    @property
    def Dz(self):
        return self.plant.Dz

    @property
    def n(self) -> int:
        return self.plant.n

    @property
    def widths(self) -> tuple[int, int, int]:
        """Widths of the controller input groups ``(vk1, vk2, y)``."""
        d = self.plant.dims
        return d["n_u"], self.n_vk2, d["n_y"]


def build_modified_plant(p: PlantModel, n_vk2: int = 2) -> ModifiedPlant:
    d = p.dims
    n, nv, nw, nu, ny = d["n"], d["n_v"], d["n_w"], d["n_u"], d["n_y"]
    Bw = np.hstack([p.B0, p.B1, p.B2, np.zeros((n, n_vk2))])
    C = np.vstack([np.zeros((nu, n)), np.zeros((n_vk2, n)), p.C2])
    # the disturbance reaches y' through D21 (the w-channel feed-through)
    D = np.vstack([np.zeros((nu, nw)), np.zeros((n_vk2, nw)), p.D21])
    D_inf = np.hstack([np.zeros((d["n_inf"], nv + nw)), p.D12, np.zeros((d["n_inf"], n_vk2))])
    Dw = np.block([
        [np.zeros((nu, nv)), np.zeros((nu, nw)), np.eye(nu), np.zeros((nu, n_vk2))],
        [np.zeros((n_vk2, nv)), np.zeros((n_vk2, nw)), np.zeros((n_vk2, nu)), np.eye(n_vk2)],
        [p.D20, p.D21, np.zeros((ny, nu)), np.zeros((ny, n_vk2))],
    ])
    return ModifiedPlant(plant=p, n_vk2=n_vk2, Bw=Bw, C=C, D=D, D_inf=D_inf, Dw=Dw)


def factor_coupling(X: np.ndarray, Y: np.ndarray, cond_max: float = 1e8) -> tuple[np.ndarray, np.ndarray]:
    """Split ``I - X Y`` into ``Sigma Xi^T``.

    ``Sigma = I - X Y, Xi = I`` when that is well conditioned, otherwise the
    balanced split ``U sqrt(s), V sqrt(s)`` of its SVD.
    """
    R = np.eye(X.shape[0]) - X @ Y
    if np.linalg.cond(R) < cond_max:
        return R, np.eye(X.shape[0])
    U, s, Vt = np.linalg.svd(R)
    return U * np.sqrt(s), Vt.T * np.sqrt(s)


def _check_factor(X, Y, Xi, Sigma, tol=1e-10):
    gap = np.linalg.norm(Sigma @ Xi.T - (np.eye(X.shape[0]) - X @ Y))
    if gap > tol * max(1.0, np.linalg.norm(X @ Y)):
        raise ConstraintViolated(f"Sigma Xi^T != I - X Y (gap {gap:.2e})")


def forward_change(Ak, Bwk, Ck, X, Y, Xi, Sigma, mp: ModifiedPlant, tol: float = 1e-10):
    _check_factor(X, Y, Xi, Sigma, tol)
    A_hat = Xi @ Ak @ Sigma.T + Xi @ Bwk @ mp.C @ X + Y @ mp.B2 @ Ck @ Sigma.T + Y @ mp.A @ X
    return A_hat, Xi @ Bwk, Ck @ Sigma.T


def recover_controller(A_hat, B_hat, C_hat, X, Y, Xi, Sigma, mp: ModifiedPlant, cond_max: float = 1e12):
    if np.linalg.cond(Xi) > cond_max or np.linalg.cond(Sigma) > cond_max:
        raise SingularTransformError("Xi or Sigma is numerically singular")
    SigT_inv = np.linalg.inv(Sigma.T)
    Ck = C_hat @ SigT_inv
    Bwk = np.linalg.solve(Xi, B_hat)
    Ak = np.linalg.solve(Xi, A_hat - Xi @ Bwk @ mp.C @ X - Y @ mp.B2 @ Ck @ Sigma.T - Y @ mp.A @ X) @ SigT_inv
    return Ak, Bwk, Ck


def split_bwk(Bwk: np.ndarray, mp: ModifiedPlant) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    a, b, _ = mp.widths
    return Bwk[:, :a], Bwk[:, a:a + b], Bwk[:, a + b:]


@dataclass(frozen=True, eq=False)
class VariableChange:
    X: np.ndarray
    Y: np.ndarray
    Xi: np.ndarray
    Sigma: np.ndarray
    A_hat: np.ndarray
    B_hat: np.ndarray
    C_hat: np.ndarray

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def Xi_tilde(self) -> np.ndarray:
        return self.Xi @ theta(self.n)

    @property
    def A_check(self) -> np.ndarray:
        return self.A_hat @ np.linalg.inv(self.Sigma.T)

    @property
    def X_check(self) -> np.ndarray:
        return self.X @ np.linalg.inv(self.Sigma.T)

    @property
    def Ck(self) -> np.ndarray:
        return self.C_hat @ np.linalg.inv(self.Sigma.T)

    def B_tilde(self, mp: ModifiedPlant) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return split_bwk(self.B_hat, mp)

    def controller(self, mp: ModifiedPlant) -> ControllerRealization:
        Ak, Bwk, Ck = recover_controller(self.A_hat, self.B_hat, self.C_hat, self.X, self.Y, self.Xi, self.Sigma, mp)
        return ControllerRealization(Ak, *split_bwk(Bwk, mp), Ck)

    @classmethod
    def from_controller(cls, k: ControllerRealization, X, Y, mp: ModifiedPlant, Xi=None) -> "VariableChange":
        """Change of variables for controller ``k`` and symmetric ``X, Y``.

        ``Xi`` may be fixed; ``Sigma`` then follows from ``Sigma Xi^T = I - X Y``.
        """
        if Xi is None:
            Sigma, Xi = factor_coupling(X, Y)
        else:
            Sigma = (np.eye(X.shape[0]) - X @ Y) @ np.linalg.inv(Xi.T)
        A_hat, B_hat, C_hat = forward_change(k.Ak, k.Bwk, k.Ck, X, Y, Xi, Sigma, mp)
        return cls(X=X, Y=Y, Xi=Xi, Sigma=Sigma, A_hat=A_hat, B_hat=B_hat, C_hat=C_hat)


def minimal_Q(mp: ModifiedPlant, vc: VariableChange, eps: float = 1e-6) -> np.ndarray:
    """Smallest ``Q`` (plus ``eps I``) making the second LQG block positive definite."""
    L = np.hstack([mp.Cz @ vc.X + mp.Dz @ vc.C_hat, mp.Cz])
    n = vc.n
    XI = np.block([[vc.X, np.eye(n)], [np.eye(n), vc.Y]])
    Q = L @ np.linalg.solve(XI, L.T)
    return 0.5 * (Q + Q.T) + eps * np.eye(Q.shape[0])


def eval_lmi_blocks(mp: ModifiedPlant, vc: VariableChange, gamma_l: float | None, gamma_inf: float | None,
                    Q: np.ndarray | None = None) -> dict:
    """The LQG blocks (negative / positive definite), trace gap and the H-infinity block.

    A threshold of None drops the corresponding condition; its entries are then None.
    """
    A, B1, B2, C1, D12, Cz, Dz = mp.A, mp.B1, mp.B2, mp.C1, mp.D12, mp.Cz, mp.Dz
    X, Y, Ah, Bh, Ch = vc.X, vc.Y, vc.A_hat, vc.B_hat, vc.C_hat
    n = vc.n
    if Q is None:
        Q = minimal_Q(mp, vc)
    top = A @ X + X @ A.T + B2 @ Ch + (B2 @ Ch).T
    off = Ah + A.T
    mid = A.T @ Y + Y @ A + Bh @ mp.C + (Bh @ mp.C).T
    ywb = Y @ mp.Bw + Bh @ mp.Dw
    nw_cl = mp.Bw.shape[1]
    blk1 = np.block([
        [top, off.T, mp.Bw],
        [off, mid, ywb],
        [mp.Bw.T, ywb.T, -np.eye(nw_cl)],
    ])
    L = Cz @ X + Dz @ Ch
    blk2 = np.block([
        [X, np.eye(n), L.T],
        [np.eye(n), Y, Cz.T],
        [L, Cz, Q],
    ])
    nb1 = B1.shape[1]
    ni = C1.shape[0]
    yb1 = Y @ B1 + Bh @ mp.D
    c1 = C1 @ X + D12 @ Ch
    g = np.nan if gamma_inf is None else gamma_inf
    hinf = np.block([
        [top, off.T, B1, c1.T],
        [off, mid, yb1, C1.T],
        [B1.T, yb1.T, -g * np.eye(nb1), np.zeros((nb1, ni))],
        [c1, C1, np.zeros((ni, nb1)), -g * np.eye(ni)],
    ])
    sym = lambda a: 0.5 * (a + a.T)
    lqg = gamma_l is not None
    return {
        "lqg_block1": sym(blk1) if lqg else None,
        "lqg_block2": sym(blk2) if lqg else None,
        "trace_gap": float(np.trace(Q) - gamma_l) if lqg else None,
        "hinf_block": sym(hinf) if gamma_inf is not None else None,
        "Q": Q,
    }


def lmi_violation(blocks: dict, margin: float = 1e-8) -> float:
    """Total amount by which the blocks miss strict definiteness (0 when all hold with ``margin``)."""
    v = 0.0
    if blocks["lqg_block1"] is not None:
        v += max(0.0, np.max(np.linalg.eigvalsh(blocks["lqg_block1"])) + margin)
        v += max(0.0, margin - np.min(np.linalg.eigvalsh(blocks["lqg_block2"])))
        v += max(0.0, blocks["trace_gap"] + margin)
    if blocks["hinf_block"] is not None:
        v += max(0.0, np.max(np.linalg.eigvalsh(blocks["hinf_block"])) + margin)
    return float(v)


def lmi_penalty(blocks: dict, margin: float = 1e-8) -> float:
    """Smooth surrogate of :func:`lmi_violation`: squared positive parts of every offending eigenvalue."""
    v = 0.0
    if blocks["lqg_block1"] is not None:
        v += np.sum(np.clip(np.linalg.eigvalsh(blocks["lqg_block1"]) + margin, 0, None) ** 2)
        v += np.sum(np.clip(margin - np.linalg.eigvalsh(blocks["lqg_block2"]), 0, None) ** 2)
        v += max(0.0, blocks["trace_gap"] + margin) ** 2
    if blocks["hinf_block"] is not None:
        v += np.sum(np.clip(np.linalg.eigvalsh(blocks["hinf_block"]) + margin, 0, None) ** 2)
    return float(v)


def eval_linear_pr(vc: VariableChange, mp: ModifiedPlant) -> tuple[float, float]:
    n = vc.n
    Bt1, Bt2, Bt3 = vc.B_tilde(mp)
    Ck = vc.Ck
    SigT_inv = np.linalg.inv(vc.Sigma.T)
    Xt = vc.Xi_tilde
    G = -vc.A_hat @ SigT_inv + (Bt3 @ mp.C2 + vc.Y @ mp.A) @ vc.X @ SigT_inv + vc.Y @ mp.B2 @ Ck
    ra = G @ Xt.T - Xt @ G.T
    for Bt in (Bt1, Bt2, Bt3):
        ra = ra + Bt @ theta(Bt.shape[1]) @ Bt.T
    rb = Bt1 - Xt @ Ck.T @ theta(Ck.shape[0])
    return float(np.linalg.norm(ra)), float(np.linalg.norm(rb))


# --- lifting -----------------------------------------------------------------

def basic_blocks(vc: VariableChange, mp: ModifiedPlant) -> list[np.ndarray]:
    Bt1, Bt2, Bt3 = vc.B_tilde(mp)
    return [vc.A_hat, Bt1, Bt2, Bt3, vc.C_hat, vc.X, vc.Y, vc.Xi_tilde, vc.Sigma, vc.Xi,
            vc.Ck, vc.A_check, vc.X_check]


def lifting_blocks(M: list[np.ndarray], mp: ModifiedPlant) -> list[np.ndarray]:
    """W1..W18 computed from M1..M13."""
    n = mp.n
    J = theta(n)
    A_hat, Bt1, Bt2, Bt3, C_hat, X, Y, Xt, Sig, Xi, Ck, Ach, Xch = M
    W = [None] * 19
    W[1], W[2], W[3] = Bt1 @ J, Bt2 @ J, Bt3 @ J
    W[4] = Y @ mp.B2
    W[5] = Bt3 @ mp.C2 + Y @ mp.A
    W[6] = Xt @ Ck.T
    W[7] = Xt @ Xch.T
    W[8] = Ach @ Xt.T
    W[9] = Y @ X
    W[10] = W[4] @ W[6].T
    W[11] = W[5] @ W[7].T
    W[12] = W[1] @ Bt1.T
    W[13] = W[2] @ Bt2.T
    W[14] = W[3] @ Bt3.T
    W[15] = Xi @ Sig.T
    W[16] = Ach @ Sig.T
    W[17] = Xch @ Sig.T
    W[18] = Ck @ Sig.T
    return W[1:]


@dataclass(frozen=True)
class LinearConstraint:
    """``sum_k L_k Z[i_k, j_k] R_k == rhs`` over ``n x n`` blocks."""

    name: str
    terms: tuple
    rhs: np.ndarray

    def residual(self, Z: np.ndarray, n: int) -> np.ndarray:
        out = -self.rhs.copy()
        for i, j, L, R in self.terms:
            out = out + L @ Z[i * n:(i + 1) * n, j * n:(j + 1) * n] @ R
        return out


def lifted_constraints(mp: ModifiedPlant) -> list[LinearConstraint]:
    n = mp.n
    I = np.eye(n)
    O = np.zeros((n, n))
    J = theta(n)
    if any(wd != n for wd in mp.widths) or mp.B2.shape[1] != n:
        raise ValueError("the lifted problem needs every controller channel group of width n")

    def c(name, *terms, rhs=O):
        return LinearConstraint(name, tuple((i, j, L, R) for i, j, L, R in terms), rhs)

    cons = [
        c("Z00 = I", (0, 0, I, I), rhs=I),
        c("X symmetric", (0, m(6), I, I), (m(6), 0, -I, I)),
        c("Y symmetric", (0, m(7), I, I), (m(7), 0, -I, I)),
        c("W1 = M2 J", (w(1), 0, I, I), (m(2), 0, -I, J)),
        c("W2 = M3 J", (w(2), 0, I, I), (m(3), 0, -I, J)),
        c("W3 = M4 J", (w(3), 0, I, I), (m(4), 0, -I, J)),
        c("W4 = M7 B2", (w(4), 0, I, I), (m(7), 0, -I, mp.B2)),
        c("W5 = M4 C2 + M7 A", (w(5), 0, I, I), (m(4), 0, -I, mp.C2), (m(7), 0, -I, mp.A)),
        c("W6 = M8 M11^T", (w(6), 0, I, I), (m(8), m(11), -I, I)),
        c("W7 = M8 M13^T", (w(7), 0, I, I), (m(8), m(13), -I, I)),
        c("W8 = M12 M8^T", (w(8), 0, I, I), (m(12), m(8), -I, I)),
        c("W9 = M7 M6^T", (w(9), 0, I, I), (m(7), m(6), -I, I)),
        c("W10 = W4 W6^T", (w(10), 0, I, I), (w(4), w(6), -I, I)),
        c("W11 = W5 W7^T", (w(11), 0, I, I), (w(5), w(7), -I, I)),
        c("W12 = W1 M2^T", (w(12), 0, I, I), (w(1), m(2), -I, I)),
        c("W13 = W2 M3^T", (w(13), 0, I, I), (w(2), m(3), -I, I)),
        c("W14 = W3 M4^T", (w(14), 0, I, I), (w(3), m(4), -I, I)),
        c("W15 = M10 M9^T", (w(15), 0, I, I), (m(10), m(9), -I, I)),
        c("W16 = M12 M9^T", (w(16), 0, I, I), (m(12), m(9), -I, I)),
        c("W17 = M13 M9^T", (w(17), 0, I, I), (m(13), m(9), -I, I)),
        c("W18 = M11 M9^T", (w(18), 0, I, I), (m(11), m(9), -I, I)),
        c("W15 = I - W9", (w(15), 0, I, I), (w(9), 0, I, I), rhs=I),
        c("M1 = W16", (m(1), 0, I, I), (w(16), 0, -I, I)),
        c("M6 = W17", (m(6), 0, I, I), (w(17), 0, -I, I)),
        c("M8 = M10 J", (m(8), 0, I, I), (m(10), 0, -I, J)),
        c("M5 = W18", (m(5), 0, I, I), (w(18), 0, -I, I)),
        # physical realisability, linear in Z; Z[0, a] is Z[a, 0]^T
        c("PR dynamics",
          (w(8), 0, -I, I), (0, w(8), I, I),
          (w(11), 0, I, I), (0, w(11), -I, I),
          (w(10), 0, I, I), (0, w(10), -I, I),
          (w(12), 0, I, I), (w(13), 0, I, I), (w(14), 0, I, I)),
        c("PR output", (m(2), 0, I, I), (w(6), 0, -I, J)),
    ]
    return cons


@dataclass(frozen=True, eq=False)
class LiftedProblem:
    n: int
    V: np.ndarray
    Z: np.ndarray
    constraints: list[LinearConstraint]

    def residuals(self, Z: np.ndarray | None = None) -> dict[str, float]:
        Z = self.Z if Z is None else Z
        return {c.name: float(np.linalg.norm(c.residual(Z, self.n))) for c in self.constraints}


def lift(M: list[np.ndarray], mp: ModifiedPlant) -> np.ndarray:
    """Stack ``V = [I; M1..M13; W1..W18]`` from the 13 basic blocks."""
    return np.vstack([np.eye(mp.n), *M, *lifting_blocks(M, mp)])


def build_lifted(vc: VariableChange, mp: ModifiedPlant) -> LiftedProblem:
    V = lift(basic_blocks(vc, mp), mp)
    return LiftedProblem(n=mp.n, V=V, Z=V @ V.T, constraints=lifted_constraints(mp))


def numerical_rank(Z: np.ndarray, rtol: float = RANK_RTOL) -> int:
    s = np.linalg.svd(Z, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def blocks_of(Z: np.ndarray, n: int) -> list[np.ndarray]:
    """The first block column ``Z[a, 0]`` for ``a = 1..31``."""
    return [Z[a * n:(a + 1) * n, :n] for a in range(1, N_BLOCKS)]


def variables_of(Z: np.ndarray, mp: ModifiedPlant) -> VariableChange:
    n = mp.n
    M = blocks_of(Z, n)
    sym = lambda a: 0.5 * (a + a.T)
    return VariableChange(X=sym(M[5]), Y=sym(M[6]), Xi=M[9], Sigma=M[8], A_hat=M[0],
                          B_hat=np.hstack([M[1], M[2], M[3]]), C_hat=M[4])


# --- affine / rank projections ------------------------------------------------

class _AffineProjector:
    """Frobenius-orthogonal projection of symmetric ``Z`` onto the equality constraints."""

    def __init__(self, constraints: list[LinearConstraint], n: int):
        size = N_BLOCKS * n
        self.size = size
        iu = np.triu_indices(size)
        self.iu = iu
        rows, rhs = [], []
        scale = np.where(iu[0] == iu[1], 1.0, 1.0 / np.sqrt(2.0))
        for con in constraints:
            A = np.zeros((n * n, size, size))
            for i, j, L, R in con.terms:
                # entry (p, q) of L Z_ij R = sum_{r,s} L[p, r] Z[i n + r, j n + s] R[s, q]
                A[:, i * n:(i + 1) * n, j * n:(j + 1) * n] += np.einsum("pr,sq->pqrs", L, R).reshape(n * n, n, n)
            # Z symmetric: fold (a, b) and (b, a) onto the upper triangle
            Asym = A + A.transpose(0, 2, 1)
            Asym[:, np.arange(size), np.arange(size)] *= 0.5
            rows.append(Asym[:, iu[0], iu[1]] * scale)
            rhs.append(con.rhs.reshape(-1))
        self.A = np.vstack(rows)
        self.b = np.concatenate(rhs)
        self.pinv = np.linalg.pinv(self.A, rcond=1e-12)
        self.scale = scale

    def to_s(self, Z):
        return Z[self.iu] / self.scale

    def to_Z(self, s):
        Z = np.zeros((self.size, self.size))
        Z[self.iu] = s * self.scale
        return Z + np.triu(Z, 1).T

    def residual(self, Z) -> float:
        return float(np.linalg.norm(self.A @ self.to_s(Z) - self.b))

    def __call__(self, Z):
        s = self.to_s(Z)
        return self.to_Z(s - self.pinv @ (self.A @ s - self.b))


def project_rank_psd(Z: np.ndarray, r: int) -> np.ndarray:
    vals, vecs = np.linalg.eigh(0.5 * (Z + Z.T))
    vals = np.clip(vals[-r:], 0.0, None)
    U = vecs[:, -r:]
    return (U * vals) @ U.T


def rank_residual(Z: np.ndarray, r: int) -> float:
    return float(np.linalg.norm(Z - project_rank_psd(Z, r)))


# --- certificates, candidates and verification ----------------------------------

def _psd_part(S: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(0.5 * (S + S.T))
    return (vecs * np.clip(vals, 0.0, None)) @ vecs.T


def certificate_from_controller(plant: PlantModel, k: ControllerRealization, gamma_inf: float | None,
                                eps: float = 1e-6, iters: int = 200) -> np.ndarray | None:
    """A common ``S = P_L^{-1}`` for both performance inequalities, or None.

    Iterates ``M S + S M^T + N N^T + (H H^T/g + S G^T G S/g - N N^T)_+ + eps I = 0``,
    whose solution satisfies both ``M S + S M^T + N N^T < 0`` and the
    bounded-real inequality ``M S + S M^T + H H^T/g + S G^T G S/g < 0``.
    With ``gamma_inf`` None only the first is imposed.
    """
    cl = assemble_closed_loop(plant, k)
    if not is_hurwitz(cl.M):
        return None
    NN = cl.N @ cl.N.T
    if gamma_inf is None:
        return solve_lyapunov(cl.M, NN + eps * np.eye(cl.M.shape[0])).P
    HH = cl.H @ cl.H.T / gamma_inf
    GG = cl.Gamma.T @ cl.Gamma / gamma_inf
    eye = np.eye(cl.M.shape[0])
    S = solve_lyapunov(cl.M, NN + _psd_part(HH - NN) + eps * eye).P
    for _ in range(iters):
        try:
            S_new = solve_lyapunov(cl.M, NN + _psd_part(HH + S @ GG @ S - NN) + eps * eye).P
        except NotHurwitzError:
            return None
        if not np.all(np.isfinite(S_new)) or np.linalg.norm(S_new) > 1e8:
            return None
        done = np.linalg.norm(S_new - S) <= 1e-12 * max(1.0, np.linalg.norm(S))
        S = S_new
        if done:
            break
    ric = cl.M @ S + S @ cl.M.T + HH + S @ GG @ S
    if np.max(np.linalg.eigvalsh(0.5 * (ric + ric.T))) >= 0:
        return None
    return S


def variables_from_certificate(S: np.ndarray, k: ControllerRealization, mp: ModifiedPlant) -> VariableChange:
    """``X, Sigma`` from ``S`` and ``Y, Xi`` from ``S^{-1}``, then the change of variables."""
    n = mp.n
    P = np.linalg.inv(S)
    X, Sigma = 0.5 * (S[:n, :n] + S[:n, :n].T), S[:n, n:]
    Y, Xi = 0.5 * (P[:n, :n] + P[:n, :n].T), P[:n, n:]
    A_hat, B_hat, C_hat = forward_change(k.Ak, k.Bwk, k.Ck, X, Y, Xi, Sigma, mp, tol=1e-8)
    return VariableChange(X=X, Y=Y, Xi=Xi, Sigma=Sigma, A_hat=A_hat, B_hat=B_hat, C_hat=C_hat)


@dataclass(frozen=True, eq=False)
class CandidateSolution:
    Z: np.ndarray
    n: int
    residual: float
    history: list[float] = field(default_factory=list)
    initial_residual: float = float("nan")
    converged: bool = False
    iterations: int = 0
    restart: int = 0

    def variables(self, mp: ModifiedPlant) -> VariableChange:
        return variables_of(self.Z, mp)


@dataclass(frozen=True)
class VerificationReport:
    equality_residual: float
    rank: int
    pr_residuals: tuple[float, float]
    stable: bool
    J_lqg: float | None
    Hinf: float | None
    lmi_feasible: bool | None
    gamma_l: float | None
    gamma_inf: float | None
    n: int
    tol: float = 1e-8

    @property
    def checks(self) -> dict[str, bool]:
        return {
            "equalities": self.equality_residual < self.tol,
            "rank": self.rank <= self.n,
            "physical_realizability": max(self.pr_residuals) < self.tol,
            "stable": self.stable,
            "lqg": self.J_lqg is not None and (self.gamma_l is None or self.J_lqg < self.gamma_l),
            "hinf": self.Hinf is not None and (self.gamma_inf is None or self.Hinf < self.gamma_inf),
        }

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def verify_candidate(c: CandidateSolution, plant: PlantModel, gamma_l: float | None, gamma_inf: float | None,
                     n_vk2: int = 2, tol: float = 1e-8) -> VerificationReport:
    """Check a candidate from scratch; every check is reported on its own."""
    mp = build_modified_plant(plant, n_vk2)
    n = mp.n
    cons = lifted_constraints(mp)
    eq = float(np.sqrt(sum(np.linalg.norm(con.residual(c.Z, n)) ** 2 for con in cons)))
    rank = numerical_rank(c.Z)
    pr = (np.inf, np.inf)
    stable = False
    J = Hinf = None
    lmi_ok = None
    try:
        vc = variables_of(c.Z, mp)
        k = vc.controller(mp)
        pr = controller_pr_residual(k)
        cl = assemble_closed_loop(plant, k)
        stable = is_hurwitz(cl.M)
        if stable:
            J, Hinf = lqg_index(cl), hinf_objective(cl)
        lmi_ok = lmi_violation(eval_lmi_blocks(mp, vc, gamma_l, gamma_inf)) == 0.0
    except (np.linalg.LinAlgError, ValueError):
        pass
    return VerificationReport(equality_residual=eq, rank=rank, pr_residuals=tuple(map(float, pr)),
                              stable=stable, J_lqg=J, Hinf=Hinf, lmi_feasible=lmi_ok,
                              gamma_l=gamma_l, gamma_inf=gamma_inf, n=n, tol=tol)


# --- heuristic solver -------------------------------------------------------------

@dataclass(frozen=True)
class APConfig:
    max_iter: int = 10
    inner_iter: int = 5
    restarts: int = 4
    seed: int = 0
    tol: float = 1e-8
    margin: float = 1e-4
    rho0: float = 1.0
    rho_growth: float = 10.0
    strict: bool = False
    init_scale: float = 1.0
    passive_init: bool = True


def _vars_vector(vc: VariableChange) -> np.ndarray:
    n = vc.n
    iu = np.triu_indices(n)
    return np.concatenate([vc.A_hat.ravel(), vc.B_hat.ravel(), vc.C_hat.ravel(), vc.X[iu], vc.Y[iu]])


def _vector_vars(x: np.ndarray, like: VariableChange) -> tuple:
    n = like.n
    iu = np.triu_indices(n)
    sizes = [like.A_hat.size, like.B_hat.size, like.C_hat.size, len(iu[0]), len(iu[0])]
    parts = np.split(x, np.cumsum(sizes)[:-1])

    def sym(v):
        S = np.zeros((n, n))
        S[iu] = v
        return S + np.triu(S, 1).T

    return (parts[0].reshape(like.A_hat.shape), parts[1].reshape(like.B_hat.shape),
            parts[2].reshape(like.C_hat.shape), sym(parts[3]), sym(parts[4]))


def _with_vector(x: np.ndarray, like: VariableChange) -> VariableChange:
    Ah, Bh, Ch, X, Y = _vector_vars(x, like)
    Sigma = (np.eye(like.n) - X @ Y) @ np.linalg.inv(like.Xi.T)
    return VariableChange(X=X, Y=Y, Xi=like.Xi, Sigma=Sigma, A_hat=Ah, B_hat=Bh, C_hat=Ch)


def _lmi_step(vc: VariableChange, mp, gamma_l, gamma_inf, margin, rho: float, maxiter: int = 300) -> VariableChange:
    """Move ``(A_hat, B_hat, C_hat, X, Y)`` towards the LMI set, ``Xi`` held fixed.

    Minimises the smoothed LMI violation plus ``rho`` times the squared
    linear realisability residual, so the step does not stray far from
    the realisable set.
    """

    def f(x):
        try:
            v = _with_vector(x, vc)
            ra, rb = eval_linear_pr(v, mp)
            return lmi_penalty(eval_lmi_blocks(mp, v, gamma_l, gamma_inf), margin) + rho * (ra * ra + rb * rb)
        except np.linalg.LinAlgError:
            return 1e10

    res = minimize(f, _vars_vector(vc), method="L-BFGS-B", options={"maxiter": maxiter})
    return _with_vector(res.x, vc) if res.fun < f(_vars_vector(vc)) else vc


def _relift(vc: VariableChange, mp: ModifiedPlant) -> np.ndarray:
    V = lift(basic_blocks(vc, mp), mp)
    return V @ V.T


def _merit(Z, proj: _AffineProjector, mp, gamma_l, gamma_inf) -> float:
    eq = proj.residual(Z)
    rk = rank_residual(Z, mp.n)
    try:
        lmi = lmi_violation(eval_lmi_blocks(mp, variables_of(Z, mp), gamma_l, gamma_inf))
    except np.linalg.LinAlgError:
        lmi = np.inf
    return eq + rk + lmi


def _random_start(plant, mp, gamma_inf, rng, cfg: APConfig):
    for _ in range(200):
        s = cfg.init_scale
        cm = s * (rng.uniform(-1, 1, (3, 1)) + 1j * rng.uniform(-1, 1, (3, 1)))
        cp = np.zeros((3, 1)) if cfg.passive_init else 0.3 * s * (rng.uniform(-1, 1, (3, 1)) + 1j * rng.uniform(-1, 1, (3, 1)))
        op = 0 if cfg.passive_init else 0.3 * s * rng.uniform(-1, 1)
        p = SLHParams(np.eye(3), cm, cp, [[s * rng.uniform(-1, 1)]], [[op]])
        k = build_controller_from_slh(p, n_u=mp.widths[0], n_vk2=mp.widths[1], n_y=mp.widths[2])
        S = certificate_from_controller(plant, k, gamma_inf)
        if S is None:
            cl = assemble_closed_loop(plant, k)
            if not is_hurwitz(cl.M):
                continue
            S = solve_lyapunov(cl.M, cl.N @ cl.N.T + np.eye(cl.M.shape[0])).P
        try:
            return variables_from_certificate(S, k, mp)
        except (np.linalg.LinAlgError, ConstraintViolated):
            continue
    raise RuntimeError("could not draw a stabilising initial controller")


def _pr_relift(vc: VariableChange, mp: ModifiedPlant) -> VariableChange:
    """Decode the controller, move it to the nearest realisable one and change variables back."""
    k = project_pr(vc.controller(mp))
    A_hat, B_hat, C_hat = forward_change(k.Ak, k.Bwk, k.Ck, vc.X, vc.Y, vc.Xi, vc.Sigma, mp, tol=1e-6)
    return VariableChange(X=vc.X, Y=vc.Y, Xi=vc.Xi, Sigma=vc.Sigma, A_hat=A_hat, B_hat=B_hat, C_hat=C_hat)


def alternating_projection_solve(plant: PlantModel, gamma_l: float | None, gamma_inf: float | None,
                                 cfg: APConfig = APConfig(), init: VariableChange | None = None,
                                 n_vk2: int = 2) -> CandidateSolution:
    """Heuristic search for a rank-``n`` lifted matrix meeting every constraint.

    Each outer iteration
      1. moves the decoded variables towards the LMI set by minimising the
         smoothed LMI violation plus a growing realisability penalty,
      2. lifts them and alternates projections onto the affine equality
         set and the rank-``n`` PSD set,
      3. decodes the controller, projects it onto the realisable
         controllers and lifts it exactly, which restores every equality
         and the rank bound so only LMI violation remains.
    The best iterate by equality + rank + LMI residual is returned; success
    is not guaranteed, so pass the result to :func:`verify_candidate`
    (or set ``cfg.strict`` to raise :class:`MaxIterations` instead).
    """
    if gamma_l is None and gamma_inf is None:
        raise ValueError("at least one threshold is required")
    if any(g is not None and not g > 0 for g in (gamma_l, gamma_inf)):
        raise ValueError("thresholds must be positive")
    mp = build_modified_plant(plant, n_vk2)
    n = mp.n
    proj = _AffineProjector(lifted_constraints(mp), n)
    rng = np.random.default_rng(cfg.seed)
    merit = lambda Z: _merit(Z, proj, mp, gamma_l, gamma_inf)

    best = None
    starts = [init] if init is not None else []
    starts += [None] * (cfg.restarts if init is None else max(cfg.restarts - 1, 0))
    for r, start in enumerate(starts):
        vc = start if start is not None else _random_start(plant, mp, gamma_inf, rng, cfg)
        Z = _relift(vc, mp)
        f_init = merit(Z)
        f_best, Z_best = f_init, Z
        history = [f_init]
        it = 0
        rho = cfg.rho0
        for it in range(1, cfg.max_iter + 1):
            if f_best < cfg.tol:
                break
            try:
                vc = _lmi_step(variables_of(Z, mp), mp, gamma_l, gamma_inf, cfg.margin, rho)
                Z = _relift(vc, mp)
                for _ in range(cfg.inner_iter):
                    Z = project_rank_psd(proj(Z), n)
                vc = _pr_relift(variables_of(Z, mp), mp)
                Z = _relift(vc, mp)
            except (np.linalg.LinAlgError, ConstraintViolated):
                Z = Z_best
                continue
            rho *= cfg.rho_growth
            f = merit(Z)
            history.append(f)
            if f < f_best:
                f_best, Z_best = f, Z
        cand = CandidateSolution(Z=Z_best, n=n, residual=f_best, history=history, initial_residual=f_init,
                                 converged=f_best < cfg.tol, iterations=it, restart=r)
        log.info("restart %d: residual %.3e -> %.3e", r, f_init, f_best)
        if best is None or cand.residual < best.residual:
            best = cand
        if best.converged:
            break
    if cfg.strict and not best.converged:
        raise MaxIterations(f"no candidate below {cfg.tol:g} (best {best.residual:.3e})", best)
    return best


def lift_controller(plant: PlantModel, k: ControllerRealization, gamma_inf: float | None,
                    n_vk2: int = 2) -> CandidateSolution:
    """Exact lift of a known controller, using a common certificate when one exists."""
    mp = build_modified_plant(plant, n_vk2)
    S = certificate_from_controller(plant, k, gamma_inf)
    if S is None:
        cl = assemble_closed_loop(plant, k)
        S = solve_lyapunov(cl.M, cl.N @ cl.N.T + np.eye(cl.M.shape[0])).P
    vc = variables_from_certificate(S, k, mp)
    Z = _relift(vc, mp)
    return CandidateSolution(Z=Z, n=mp.n, residual=0.0, converged=True)
