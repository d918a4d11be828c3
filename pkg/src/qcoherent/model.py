"""Linear quantum system representations.

Two representations are supported: the complex annihilation-creation form
built from physical (S, L, H) parameters, and the real quadrature form
used everywhere else. Quadrature vectors are always interleaved as
``(q1, p1, q2, p2, ...)`` so the canonical commutation matrix is
``Theta = diag(F, ..., F)`` with ``F = [[0, 1], [-1, 0]]``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

F = np.array([[0.0, 1.0], [-1.0, 0.0]])

PR_TOL = 1e-9
IMAG_TOL = 1e-10
PASSIVE_TOL = 1e-12


class ImaginaryResidueError(ValueError):
    """Quadrature matrices came out complex: the input was not a consistent doubled-up system."""


def theta(n: int) -> np.ndarray:
    """Canonical commutation matrix ``diag(F, ..., F)`` of size ``n``."""
    if n % 2:
        raise ValueError(f"quadrature dimension must be even, got {n}")
    return np.kron(np.eye(n // 2), F)


def doubled_up(U, V) -> np.ndarray:
    U = np.atleast_2d(np.asarray(U, dtype=complex))
    V = np.atleast_2d(np.asarray(V, dtype=complex))
    if U.shape != V.shape:
        raise ValueError(f"doubled_up needs equal shapes, got {U.shape} and {V.shape}")
    return np.block([[U, V], [V.conj(), U.conj()]])


def _J(k: int) -> np.ndarray:
    return np.diag(np.concatenate([np.ones(k), -np.ones(k)]))


def flat(X, N: int | None = None, M: int | None = None) -> np.ndarray:
    """``X^flat = J_M X^dagger J_N`` for a ``2N x 2M`` matrix ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    r, c = X.shape
    if r % 2 or c % 2:
        raise ValueError(f"flat needs even dimensions, got {X.shape}")
    N = r // 2 if N is None else N
    M = c // 2 if M is None else M
    if (2 * N, 2 * M) != X.shape:
        raise ValueError(f"X has shape {X.shape}, expected {(2 * N, 2 * M)}")
    return _J(M) @ X.conj().T @ _J(N)


def lambda_matrix(n: int) -> np.ndarray:
    if n % 2 or n <= 0:
        raise ValueError(f"lambda_matrix needs a positive even size, got {n}")
    eye = np.eye(n // 2)
    return np.block([[eye, eye], [-1j * eye, 1j * eye]]) / np.sqrt(2.0)


def interleave_permutation(n: int) -> np.ndarray:
    """Permutation matrix taking ``(q1..qN, p1..pN)`` to ``(q1, p1, ..., qN, pN)``."""
    if n % 2:
        raise ValueError(f"quadrature dimension must be even, got {n}")
    half = n // 2
    order = np.empty(n, dtype=int)
    order[0::2] = np.arange(half)
    order[1::2] = np.arange(half, n)
    return np.eye(n)[order]


def to_quadrature(X, tol: float = IMAG_TOL) -> np.ndarray:
    """Map a doubled-up block ``X`` (``r x c``) to its real interleaved quadrature image."""
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    r, c = X.shape
    Pr, Pc = interleave_permutation(r), interleave_permutation(c)
    Y = Pr @ lambda_matrix(r) @ X @ lambda_matrix(c).conj().T @ Pc.T
    resid = float(np.max(np.abs(Y.imag), initial=0.0))
    if resid > tol:
        raise ImaginaryResidueError(f"imaginary residue {resid:.3e} exceeds {tol:.0e}")
    return np.ascontiguousarray(Y.real)


def _as_complex(x, shape=None) -> np.ndarray:
    a = np.atleast_2d(np.asarray(x, dtype=complex))
    if shape is not None and a.shape != shape:
        raise ValueError(f"expected shape {shape}, got {a.shape}")
    return a


@dataclass(frozen=True, eq=False)
class SLHParams:
    """Physical parameters of an open linear quantum system.

    ``C_minus``/``C_plus`` are ``N_w x N`` (coupling ``L = C- a + C+ a#``),
    ``Omega_minus``/``Omega_plus`` are ``N x N``. ``K_minus``/``K_plus``
    optionally describe direct coupling to another system.
    """

    S: np.ndarray
    C_minus: np.ndarray
    C_plus: np.ndarray
    Omega_minus: np.ndarray
    Omega_plus: np.ndarray
    K_minus: np.ndarray | None = None
    K_plus: np.ndarray | None = None
    tol: float = field(default=1e-9, repr=False)

    def __post_init__(self):
        S = _as_complex(self.S)
        Cm = _as_complex(self.C_minus)
        Nw, N = Cm.shape
        Cp = _as_complex(self.C_plus, (Nw, N))
        Om = _as_complex(self.Omega_minus, (N, N))
        Op = _as_complex(self.Omega_plus, (N, N))
        if S.shape != (Nw, Nw):
            raise ValueError(f"S must be {Nw}x{Nw}, got {S.shape}")
        for name, a in (("S", S), ("C_minus", Cm), ("C_plus", Cp), ("Omega_minus", Om), ("Omega_plus", Op)):
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} has non-finite entries")
        if np.linalg.norm(S @ S.conj().T - np.eye(Nw)) > self.tol:
            raise ValueError("S must be unitary")
        if np.linalg.norm(Om - Om.conj().T) > self.tol:
            raise ValueError("Omega_minus must be Hermitian")
        if np.linalg.norm(Op - Op.T) > self.tol:
            raise ValueError("Omega_plus must be symmetric")
        Km = self.K_minus
        Kp = self.K_plus
        if (Km is None) != (Kp is None):
            if Km is None:
                Km = np.zeros_like(_as_complex(Kp))
            else:
                Kp = np.zeros_like(_as_complex(Km))
        if Km is not None:
            Km = _as_complex(Km)
            Kp = _as_complex(Kp, Km.shape)
        for name, a in (("S", S), ("C_minus", Cm), ("C_plus", Cp), ("Omega_minus", Om),
                        ("Omega_plus", Op), ("K_minus", Km), ("K_plus", Kp)):
            object.__setattr__(self, name, a)

    @property
    def n_modes(self) -> int:
        return self.C_minus.shape[1]

    @property
    def n_channels(self) -> int:
        return self.C_minus.shape[0]

    @classmethod
    def passive(cls, C_minus, Omega_minus=None, S=None) -> "SLHParams":
        Cm = _as_complex(C_minus)
        Nw, N = Cm.shape
        return cls(
            S=np.eye(Nw) if S is None else S,
            C_minus=Cm,
            C_plus=np.zeros((Nw, N)),
            Omega_minus=np.zeros((N, N)) if Omega_minus is None else Omega_minus,
            Omega_plus=np.zeros((N, N)),
        )


@dataclass(frozen=True, eq=False)
class QuadratureSystem:
    """Real quadrature model ``dx = A x dt + B dw``, ``dy = C x dt + D dw``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    Theta: np.ndarray | None = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        n = A.shape[0]
        B = np.asarray(self.B, dtype=float).reshape(n, -1)
        C = np.asarray(self.C, dtype=float).reshape(-1, n)
        D = np.asarray(self.D, dtype=float).reshape(C.shape[0], B.shape[1])
        if A.shape != (n, n):
            raise ValueError("A must be square")
        for name, size in (("n", n), ("n_w", B.shape[1]), ("n_y", C.shape[0])):
            if size % 2:
                raise ValueError(f"{name} must be even, got {size}")
        Th = theta(n) if self.Theta is None else np.asarray(self.Theta, dtype=float)
        for name, a in (("A", A), ("B", B), ("C", C), ("D", D)):
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} has non-finite entries")
            object.__setattr__(self, name, a)
        object.__setattr__(self, "Theta", Th)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def n_w(self) -> int:
        return self.B.shape[1]

    @property
    def n_y(self) -> int:
        return self.C.shape[0]


def build_accr_system(p: SLHParams) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Annihilation-creation matrices ``(A, B, C, D)`` (doubled-up, complex) of an SLH system."""
    N = p.n_modes
    C = doubled_up(p.C_minus, p.C_plus)
    D = doubled_up(p.S, np.zeros_like(p.S))
    Cflat = flat(C, p.n_channels, N)
    A = -0.5 * Cflat @ C - 1j * _J(N) @ doubled_up(p.Omega_minus, p.Omega_plus)
    B = -Cflat @ D
    return A, B, C, D


def accr_to_quadrature(A, B, C, D, tol: float = IMAG_TOL) -> QuadratureSystem:
    return QuadratureSystem(
        A=to_quadrature(A, tol),
        B=to_quadrature(B, tol),
        C=to_quadrature(C, tol),
        D=to_quadrature(D, tol),
    )


def slh_to_quadrature(p: SLHParams) -> QuadratureSystem:
    return accr_to_quadrature(*build_accr_system(p))


@dataclass(frozen=True)
class PRReport:
    residual_dyn: float
    residual_out: float
    residual_feed: float
    tol: float = PR_TOL

    @property
    def passed(self) -> bool:
        return max(self.residual_dyn, self.residual_out, self.residual_feed) < self.tol


def check_physical_realizability(q: QuadratureSystem, tol: float = PR_TOL,
                                 output_columns=None) -> PRReport:
    """Frobenius residuals of the quadrature physical-realizability identities.

    ``output_columns`` selects the input columns that feed through to ``y``
    (default: the first ``n_y`` columns, i.e. ``D = [I 0]``).
    """
    n, nw, ny = q.n, q.n_w, q.n_y
    cols = np.arange(ny) if output_columns is None else np.asarray(output_columns, dtype=int)
    if cols.shape != (ny,):
        raise ValueError(f"need {ny} output columns, got {cols.shape}")
    Fw = theta(nw)
    Fy = theta(ny)
    dyn = q.A @ q.Theta + q.Theta @ q.A.T + q.B @ Fw @ q.B.T
    out = q.B[:, cols] - q.Theta @ q.C.T @ Fy
    D_expected = np.zeros((ny, nw))
    D_expected[np.arange(ny), cols] = 1.0
    return PRReport(
        residual_dyn=float(np.linalg.norm(dyn)),
        residual_out=float(np.linalg.norm(out)),
        residual_feed=float(np.linalg.norm(q.D - D_expected)),
        tol=tol,
    )


class PassivityClass(enum.Enum):
    PASSIVE = "passive"
    NON_PASSIVE = "non-passive"


def classify(p: SLHParams, tol: float = PASSIVE_TOL) -> PassivityClass:
    plus = [p.C_plus, p.Omega_plus]
    if p.K_plus is not None:
        plus.append(p.K_plus)
    if all(np.linalg.norm(a) < tol for a in plus):
        return PassivityClass.PASSIVE
    return PassivityClass.NON_PASSIVE


def direct_coupling_blocks(K_minus, K_plus) -> tuple[np.ndarray, np.ndarray]:
    """Doubled-up direct-coupling blocks ``(B12, B21)``.

    ``K`` is ``N2 x N1``: ``B21`` drives system 2 from system 1 and
    ``B12 = -B21^flat`` drives system 1 from system 2.
    """
    Km = _as_complex(K_minus)
    Kp = _as_complex(K_plus)
    if Km.shape != Kp.shape:
        raise ValueError(f"K_minus {Km.shape} and K_plus {Kp.shape} differ in shape")
    B21 = doubled_up(Km, Kp)
    B12 = -flat(B21)
    return B12, B21
