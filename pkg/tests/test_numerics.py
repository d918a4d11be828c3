import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import gramian_integral, hinf_sweep, random_stable
from qcoherent.numerics import (
    NotHurwitzError,
    RiccatiInputs,
    hinf_norm,
    is_hurwitz,
    is_negative_definite,
    is_positive_definite,
    riccati_residuals,
    solve_lyapunov,
    spectral_abscissa,
)
from qcoherent.registry import remark4, remark4_closed_form


def test_spectral_abscissa_and_hurwitz():
    assert spectral_abscissa(np.diag([-1.0, -3.0])) == -1.0
    assert is_hurwitz(-np.eye(2))
    assert not is_hurwitz(np.zeros((2, 2)))
    assert not is_hurwitz(np.array([[0.0, 1.0], [-1.0, 0.0]]))


def test_lyapunov_scalar():
    # m p + p m + q = 0 -> p = q / (2|m|)
    assert solve_lyapunov([[-2.0]], [[4.0]]).P[0, 0] == pytest.approx(1.0, rel=1e-15)


def test_lyapunov_rejects_unstable():
    with pytest.raises(NotHurwitzError):
        solve_lyapunov(np.eye(2), np.eye(2))


@given(st.integers(0, 2**31 - 1), st.integers(1, 6))
def test_lyapunov_matches_integral(seed, n):
    r = np.random.default_rng(seed)
    A, B, _ = random_stable(r, n, margin=0.3)
    Q = B @ B.T
    sol = solve_lyapunov(A, Q)
    ref = gramian_integral(A, Q)
    assert np.allclose(sol.P, ref, rtol=1e-6, atol=1e-8 * np.abs(ref).max())
    assert np.array_equal(sol.P, sol.P.T)


def test_hinf_first_order():
    # |c b / (j w - a)| peaks at w = 0 with |c b| / |a|
    assert hinf_norm([[-2.0]], [[3.0]], [[0.5]]) == pytest.approx(0.75, rel=1e-9)


def test_hinf_resonant_peak():
    # lightly damped oscillator: peak well above the DC gain
    z, w0 = 0.05, 2.0
    A = np.array([[0.0, 1.0], [-w0**2, -2 * z * w0]])
    B = np.array([[0.0], [w0**2]])
    C = np.array([[1.0, 0.0]])
    exact = 1 / (2 * z * np.sqrt(1 - z**2))
    assert hinf_norm(A, B, C) == pytest.approx(exact, rel=1e-9)


@given(st.integers(0, 2**31 - 1), st.integers(1, 8))
def test_hinf_matches_sweep(seed, n):
    r = np.random.default_rng(seed)
    A, B, C = random_stable(r, n)
    h = hinf_norm(A, B, C)
    assert h == pytest.approx(hinf_sweep(A, B, C), rel=1e-6)
    assert isinstance(h, float)


def test_hinf_zero_input():
    assert hinf_norm(-np.eye(2), np.zeros((2, 1)), np.ones((1, 2))) == 0.0


def test_hinf_rejects_unstable():
    with pytest.raises(NotHurwitzError):
        hinf_norm(np.eye(1), np.eye(1), np.eye(1))


def test_definiteness_helpers():
    assert is_positive_definite(np.eye(2))
    assert not is_positive_definite(np.diag([1.0, 0.0]))
    assert is_negative_definite(-np.eye(3))
    assert not is_negative_definite(np.diag([-1.0, 1e-12]))


def test_riccati_inputs_validation():
    with pytest.raises(ValueError):
        RiccatiInputs(-np.eye(2), np.eye(2), np.eye(2), np.eye(2), np.eye(2), np.eye(2), np.zeros((2, 2)), 1.0)
    with pytest.raises(ValueError):
        remark4(1e-3, gamma_inf=-1.0)


@pytest.mark.parametrize("delta", [1e-3, 1e-2, 0.1])
def test_remark4_closed_form_solves_filter_equation(delta):
    gamma = 2 * np.sqrt(0.4) * delta
    r = remark4(delta, gamma)
    for Y in remark4_closed_form(delta, gamma):
        _, RY = riccati_residuals(r, Y=Y)
        assert np.linalg.norm(RY) < 1e-8


def test_remark4_positive_candidate_depends_on_gamma():
    d = 1e-3
    good = remark4_closed_form(d, 2 * np.sqrt(0.4) * d)[-1]
    bad = remark4_closed_form(d, 0.5 * np.sqrt(0.4) * d)[-1]
    assert is_positive_definite(good)
    assert not is_positive_definite(bad)


def test_riccati_control_equation_shape_checks():
    r = remark4(0.1)
    RX, RY = riccati_residuals(r, X=np.zeros((2, 2)))
    assert RY is None and RX.shape == (2, 2)
    with pytest.raises(ValueError):
        riccati_residuals(r, Y=np.zeros((3, 3)))
