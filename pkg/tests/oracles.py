"""Independent reference computations used only by the tests."""
import numpy as np
from scipy.integrate import quad_vec
from scipy.linalg import expm
from scipy.optimize import minimize_scalar

from qcoherent.model import SLHParams


def gramian_integral(M, Q, rtol=1e-11):
    """P = int_0^inf e^{Mt} Q e^{M^T t} dt by adaptive quadrature."""
    f = lambda t: expm(M * t) @ Q @ expm(M.T * t)
    val, _ = quad_vec(f, 0, np.inf, epsrel=rtol, epsabs=1e-14)
    return 0.5 * (val + val.T)


def _gain(M, H, G, w):
    return np.linalg.norm(G @ np.linalg.solve(1j * w * np.eye(M.shape[0]) - M, H), 2)


def hinf_sweep(M, H, G, n_grid=4000):
    """Peak gain from a log-spaced sweep refined by bounded scalar search around the best points."""
    eig = np.abs(np.linalg.eigvals(M))
    lo, hi = max(eig.min(), 1e-6) * 1e-3, eig.max() * 1e3
    grid = np.concatenate([[0.0], np.geomspace(lo, hi, n_grid)])
    vals = np.array([_gain(M, H, G, w) for w in grid])
    best = vals.max()
    for i in np.argsort(vals)[-6:]:
        a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        if b <= a:
            continue
        r = minimize_scalar(lambda w: -_gain(M, H, G, w), bounds=(a, b), method="bounded",
                            options={"xatol": 1e-12 * max(1.0, b)})
        best = max(best, -r.fun)
    return best


def random_stable(rng, n, m=None, p=None, margin=0.1):
    """A random real system with spectral abscissa at most ``-margin``."""
    m = m or rng.integers(1, 4)
    p = p or rng.integers(1, 4)
    A = rng.normal(size=(n, n))
    A -= (np.max(np.linalg.eigvals(A).real) + margin + rng.uniform(0, 1)) * np.eye(n)
    return A, rng.normal(size=(n, m)), rng.normal(size=(p, n))


def random_slh(rng, n_modes=1, n_channels=3, passive=False, scale=1.0, coupling_modes=None):
    c = lambda *s: scale * (rng.normal(size=s) + 1j * rng.normal(size=s))
    H = c(n_modes, n_modes)
    Om = 0.5 * (H + H.conj().T)
    if passive:
        Cp = np.zeros((n_channels, n_modes))
        Op = np.zeros((n_modes, n_modes))
    else:
        Cp = 0.4 * c(n_channels, n_modes)
        Z = 0.4 * c(n_modes, n_modes)
        Op = 0.5 * (Z + Z.T)
    Km = Kp = None
    if coupling_modes:
        Km = c(n_modes, coupling_modes)
        Kp = np.zeros_like(Km) if passive else 0.4 * c(n_modes, coupling_modes)
    return SLHParams(np.eye(n_channels), c(n_channels, n_modes), Cp, Om, Op, Km, Kp)
