"""Dense linear-algebra kernels used throughout the package.

Everything here works on small dense real matrices (closed loops of order
at most a few dozen), so the implementations favour transparency over
asymptotic speed: Lyapunov equations are solved by Kronecker
vectorisation and the H-infinity norm by Hamiltonian bisection.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HURWITZ_MARGIN = 1e-12
AXIS_TOL = 1e-8
DEFINITE_TOL = 1e-10


class NotHurwitzError(ValueError):
    """Raised when a stability-dependent quantity is requested for an unstable matrix."""


class SingularSystemError(np.linalg.LinAlgError):
    pass


def spectral_abscissa(M: np.ndarray) -> float:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return -np.inf
    return float(np.max(np.linalg.eigvals(M).real))


def is_hurwitz(M: np.ndarray) -> bool:
    return spectral_abscissa(M) < -HURWITZ_MARGIN


def _require_hurwitz(M: np.ndarray) -> None:
    alpha = spectral_abscissa(M)
    if not alpha < -HURWITZ_MARGIN:
        raise NotHurwitzError(f"matrix is not Hurwitz (spectral abscissa {alpha:.3e})")


@dataclass(frozen=True, eq=False)
class LyapunovSolution:
    P: np.ndarray
    residual: float


def solve_lyapunov(M: np.ndarray, Q: np.ndarray) -> LyapunovSolution:
    """Solve ``M P + P M^T + Q = 0`` for a Hurwitz ``M``.

    Uses ``(I kron M + M kron I) vec(P) = -vec(Q)`` with column-major vec,
    followed by one step of iterative refinement. The returned ``P`` is
    exactly symmetric.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    n = M.shape[0]
    if M.shape != (n, n) or Q.shape != (n, n):
        raise ValueError(f"shape mismatch: M {M.shape}, Q {Q.shape}")
    _require_hurwitz(M)
    Q = 0.5 * (Q + Q.T)

    eye = np.eye(n)
    K = np.kron(eye, M) + np.kron(M, eye)
    rhs = -Q.reshape(-1, order="F")
    if np.linalg.cond(K) > 1e14:
        raise SingularSystemError("Kronecker Lyapunov system is numerically singular")
    vec = np.linalg.solve(K, rhs)
    vec = vec + np.linalg.solve(K, rhs - K @ vec)

    P = vec.reshape((n, n), order="F")
    P = 0.5 * (P + P.T)
    residual = float(np.linalg.norm(M @ P + P @ M.T + Q))
    return LyapunovSolution(P=P, residual=residual)


def _axis_frequencies(M, HHt, GtG, gamma: float) -> np.ndarray:
    """Frequencies of Hamiltonian eigenvalues on the imaginary axis (empty iff gamma > norm)."""
    ham = np.block([[M, HHt / gamma], [-GtG / gamma, -M.T]])
    eig = np.linalg.eigvals(ham)
    return np.abs(eig[np.abs(eig.real) < AXIS_TOL].imag)


def _gain(M, H, Gamma, w: float) -> float:
    G = Gamma @ np.linalg.solve(1j * w * np.eye(M.shape[0]) - M, H)
    return float(np.linalg.norm(G, 2))


def hinf_norm(M: np.ndarray, H: np.ndarray, Gamma: np.ndarray, tol: float = 1e-10) -> float:
    """H-infinity norm of the strictly proper transfer ``Gamma (sI - M)^-1 H``.

    Bisection on gamma: gamma exceeds the norm exactly when the Hamiltonian
    ``[[M, H H^T / gamma], [-Gamma^T Gamma / gamma, -M^T]]`` has no eigenvalue
    on the imaginary axis. Whenever a probe lies below the norm, the lower
    end is raised to the largest gain found at the midpoints of the
    imaginary-axis frequencies, which makes the bracket collapse in a
    handful of probes instead of ~30.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    H = np.atleast_2d(np.asarray(H, dtype=float))
    Gamma = np.atleast_2d(np.asarray(Gamma, dtype=float))
    alpha = spectral_abscissa(M)
    if not alpha < -HURWITZ_MARGIN:
        raise NotHurwitzError(f"matrix is not Hurwitz (spectral abscissa {alpha:.3e})")

    HHt = H @ H.T
    GtG = Gamma.T @ Gamma
    if not HHt.any() or not GtG.any():
        return 0.0

    lo = 0.0
    hi = max(np.linalg.norm(Gamma, 2) * np.linalg.norm(H, 2) / abs(alpha), 1e-300)
    # ||Gamma|| ||H|| / |alpha| bounds the norm only for normal M
    for _ in range(200):
        if _axis_frequencies(M, HHt, GtG, hi).size == 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise RuntimeError("could not bracket the H-infinity norm")
    lo = max(lo, _gain(M, H, Gamma, 0.0))

    fresh = lo > 0
    for _ in range(500):
        width = tol * max(1.0, hi)
        if hi - lo < width:
            break
        probe = lo + 0.5 * width if fresh else 0.5 * (lo + hi)
        freqs = _axis_frequencies(M, HHt, GtG, probe)
        if freqs.size == 0:
            hi = probe
            fresh = False
            continue
        freqs = np.unique(freqs)
        trial = np.concatenate([freqs, 0.5 * (freqs[1:] + freqs[:-1])])
        best = max(_gain(M, H, Gamma, w) for w in trial)
        fresh = best > probe
        lo = max(probe, best)
        if lo >= hi:
            # probe was numerically at the norm; the gain cannot exceed a verified upper bound
            lo = hi - 0.5 * width
    return float(0.5 * (lo + hi))


def _sym(X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return 0.5 * (X + X.T)


def is_positive_definite(X: np.ndarray, tol: float = DEFINITE_TOL) -> bool:
    X = _sym(X)
    return bool(X.size) and bool(np.min(np.linalg.eigvalsh(X)) > tol)


def is_negative_definite(X: np.ndarray, tol: float = DEFINITE_TOL) -> bool:
    X = _sym(X)
    return bool(X.size) and bool(np.max(np.linalg.eigvalsh(X)) < -tol)


@dataclass(frozen=True, eq=False)
class RiccatiInputs:
    """Data of the H-infinity Riccati pair for a plant with (B1, D21) disturbance channel."""

    A: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    C1: np.ndarray
    C2: np.ndarray
    D12: np.ndarray
    D21: np.ndarray
    gamma_inf: float

    def __post_init__(self):
        for name in ("A", "B1", "B2", "C1", "C2", "D12", "D21"):
            object.__setattr__(self, name, np.atleast_2d(np.asarray(getattr(self, name), dtype=float)))
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise ValueError("A must be square")
        if self.B1.shape[0] != n or self.B2.shape[0] != n:
            raise ValueError("B1/B2 row count must match A")
        if self.C1.shape[1] != n or self.C2.shape[1] != n:
            raise ValueError("C1/C2 column count must match A")
        if self.D12.shape != (self.C1.shape[0], self.B2.shape[1]):
            raise ValueError("D12 must be n_inf x n_u")
        if self.D21.shape != (self.C2.shape[0], self.B1.shape[1]):
            raise ValueError("D21 must be n_y x n_w")
        if not self.gamma_inf > 0:
            raise ValueError("gamma_inf must be positive")
        if not is_positive_definite(self.E1) or not is_positive_definite(self.E2):
            raise ValueError("E1 = D12^T D12 and E2 = D21 D21^T must be positive definite")

    @property
    def E1(self) -> np.ndarray:
        return self.D12.T @ self.D12

    @property
    def E2(self) -> np.ndarray:
        return self.D21 @ self.D21.T


def riccati_residuals(r: RiccatiInputs, X: np.ndarray | None = None,
                      Y: np.ndarray | None = None) -> tuple[np.ndarray | None, np.ndarray | None]:
    """Left-hand sides of the control (X) and filter (Y) H-infinity Riccati equations."""
    g2 = r.gamma_inf ** 2
    E1inv = np.linalg.inv(r.E1)
    E2inv = np.linalg.inv(r.E2)
    R_X = R_Y = None
    if X is not None:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape != r.A.shape:
            raise ValueError("X must match A")
        Ax = r.A - r.B2 @ E1inv @ r.D12.T @ r.C1
        quad = r.B1 @ r.B1.T - g2 * r.B2 @ E1inv @ r.B2.T
        const = r.C1.T @ (np.eye(r.D12.shape[0]) - r.D12 @ E1inv @ r.D12.T) @ r.C1 / g2
        R_X = Ax.T @ X + X @ Ax + X @ quad @ X + const
    if Y is not None:
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if Y.shape != r.A.shape:
            raise ValueError("Y must match A")
        Ay = r.A - r.B1 @ r.D21.T @ E2inv @ r.C2
        quad = r.C1.T @ r.C1 / g2 - r.C2.T @ E2inv @ r.C2
        const = r.B1 @ (np.eye(r.D21.shape[1]) - r.D21.T @ E2inv @ r.D21) @ r.B1.T
        R_Y = Ay @ Y + Y @ Ay.T + Y @ quad @ Y + const
    return R_X, R_Y
