import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import random_slh
from qcoherent.model import (
    ImaginaryResidueError,
    PassivityClass,
    QuadratureSystem,
    SLHParams,
    accr_to_quadrature,
    build_accr_system,
    check_physical_realizability,
    classify,
    direct_coupling_blocks,
    doubled_up,
    flat,
    lambda_matrix,
    slh_to_quadrature,
    theta,
    to_quadrature,
)
from qcoherent.registry import cavity, cavity_slh, dpa, dpa_slh


def test_doubled_up_examples():
    assert np.array_equal(doubled_up([[1]], [[0]]), np.eye(2))
    assert np.array_equal(doubled_up([[0]], [[1j]]), np.array([[0, 1j], [-1j, 0]]))
    with pytest.raises(ValueError):
        doubled_up(np.zeros((1, 2)), np.zeros((2, 1)))


def test_theta_is_canonical():
    T = theta(6)
    assert np.array_equal(T.T, -T)
    assert np.array_equal(T @ T, -np.eye(6))
    with pytest.raises(ValueError):
        theta(3)


def test_lambda_unitary():
    L = lambda_matrix(4)
    assert np.allclose(L @ L.conj().T, np.eye(4), atol=1e-15)


@given(st.integers(0, 2**31 - 1))
def test_flat_is_an_involution(seed):
    r = np.random.default_rng(seed)
    X = r.normal(size=(4, 6)) + 1j * r.normal(size=(4, 6))
    assert np.allclose(flat(flat(X)), X, atol=1e-14)


@given(st.integers(0, 2**31 - 1))
def test_doubled_up_maps_to_real_quadrature(seed):
    r = np.random.default_rng(seed)
    U = r.normal(size=(2, 3)) + 1j * r.normal(size=(2, 3))
    V = r.normal(size=(2, 3)) + 1j * r.normal(size=(2, 3))
    Q = to_quadrature(doubled_up(U, V))
    assert Q.shape == (4, 6) and np.isrealobj(Q)


def test_non_doubled_up_input_has_imaginary_residue():
    with pytest.raises(ImaginaryResidueError):
        to_quadrature(np.array([[1j, 0], [0, 1j]]))


def test_cavity_quadrature_matrices():
    q = slh_to_quadrature(cavity_slh())
    assert np.allclose(q.A, -1.5 * np.eye(2), atol=1e-14)
    for i, k in enumerate((2.6, 0.2, 0.2)):
        assert np.allclose(q.B[:, 2 * i:2 * i + 2], -np.sqrt(k) * np.eye(2), atol=1e-14)
    assert np.allclose(q.D, np.eye(6), atol=1e-14)


def test_dpa_drift():
    q = slh_to_quadrature(dpa_slh())
    assert np.allclose(q.A, -0.5 * np.diag([0.89, 0.91]), atol=1e-14)
    assert np.allclose(q.A, dpa().A, atol=1e-14)


def test_registry_plants_are_realizable():
    for p in (cavity(), dpa()):
        rep = p.pr_report(tol=1e-10)
        assert rep.passed, rep


@given(st.integers(0, 2**31 - 1), st.integers(1, 3), st.integers(1, 4), st.booleans())
def test_random_slh_is_realizable(seed, n_modes, n_channels, passive):
    p = random_slh(np.random.default_rng(seed), n_modes, n_channels, passive)
    rep = check_physical_realizability(slh_to_quadrature(p))
    assert rep.passed, rep


def test_accr_route_matches_and_perturbation_breaks_realizability(rng):
    p = random_slh(rng)
    q = accr_to_quadrature(*build_accr_system(p))
    assert np.allclose(q.A, slh_to_quadrature(p).A)
    broken = QuadratureSystem(q.A + 0.1 * np.eye(q.n), q.B, q.C, q.D, q.Theta)
    rep = check_physical_realizability(broken)
    assert not rep.passed and rep.residual_dyn > 0.1


def test_slh_validation():
    with pytest.raises(ValueError):
        SLHParams(2 * np.eye(1), [[1.0]], [[0.0]], [[0.0]], [[0.0]])  # S not unitary
    with pytest.raises(ValueError):
        SLHParams(np.eye(1), [[1.0]], [[0.0]], [[1j]], [[0.0]])  # Omega_- not Hermitian
    with pytest.raises(ValueError):
        SLHParams(np.eye(1), [[1.0]], [[0.0]], [[0.0, 0.0]], [[0.0]])
    with pytest.raises(ValueError):
        SLHParams(np.eye(1), [[np.nan]], [[0.0]], [[0.0]], [[0.0]])


def test_classify():
    assert classify(cavity_slh()) is PassivityClass.PASSIVE
    assert classify(dpa_slh()) is PassivityClass.NON_PASSIVE


def test_direct_coupling_blocks_relation(rng):
    Km = rng.normal(size=(2, 1)) + 1j * rng.normal(size=(2, 1))
    Kp = rng.normal(size=(2, 1)) + 1j * rng.normal(size=(2, 1))
    B12, B21 = direct_coupling_blocks(Km, Kp)
    assert np.allclose(B21, doubled_up(Km, Kp))
    assert np.allclose(B12, -flat(B21))
    with pytest.raises(ValueError):
        direct_coupling_blocks(Km, np.zeros((1, 2)))
