import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import random_slh
from qcoherent.closedloop import (
    ControllerRealization,
    PlantModel,
    assemble_closed_loop,
    build_controller_from_slh,
    controller_pr_residual,
    coupling_drift,
    project_pr,
)
from qcoherent.model import SLHParams
from qcoherent.registry import cavity, dpa


def _controller(rng, passive=False):
    return build_controller_from_slh(random_slh(rng, passive=passive))


def test_closed_loop_blocks(rng):
    p, k = dpa(), _controller(rng)
    cl = assemble_closed_loop(p, k)
    n = p.n
    assert np.array_equal(cl.M[:n, :n], p.A)
    assert np.allclose(cl.M[:n, n:], p.B2 @ k.Ck)
    assert np.allclose(cl.M[n:, :n], k.Bk3 @ p.C2)
    assert np.array_equal(cl.M[n:, n:], k.Ak)
    assert np.allclose(cl.N[n:, :2], k.Bk3 @ p.D20)
    assert np.allclose(cl.H, np.vstack([p.B1, k.Bk3 @ p.D21]))
    assert np.allclose(cl.Gamma, np.hstack([p.C1, p.D12 @ k.Ck]))
    assert np.allclose(cl.Psi, np.hstack([p.Cz, p.Dz @ k.Ck]))
    assert cl.N.shape == (4, 8) and cl.Pi.shape == (2, 8)


@given(st.integers(0, 2**31 - 1), st.booleans())
def test_slh_controllers_are_realizable(seed, passive):
    k = _controller(np.random.default_rng(seed), passive)
    ra, rb = controller_pr_residual(k)
    assert ra < 1e-9 and rb < 1e-9


def test_controller_needs_identity_scattering(rng):
    p = random_slh(rng)
    U = np.diag([1, -1, 1j]).astype(complex)
    with pytest.raises(ValueError):
        build_controller_from_slh(SLHParams(U, p.C_minus, p.C_plus, p.Omega_minus, p.Omega_plus))
    with pytest.raises(ValueError):
        build_controller_from_slh(p, n_u=2, n_vk2=2, n_y=4)


@given(st.integers(0, 2**31 - 1))
def test_project_pr_lands_on_realizable_set(seed):
    r = np.random.default_rng(seed)
    k = ControllerRealization(*(r.normal(size=s) for s in [(2, 2), (2, 2), (2, 2), (2, 2), (2, 2)]))
    kp = project_pr(k)
    assert max(controller_pr_residual(kp)) < 1e-12
    assert np.array_equal(kp.Bk2, k.Bk2) and np.array_equal(kp.Ck, k.Ck)


def test_project_pr_keeps_realizable_controller(rng):
    k = _controller(rng)
    kp = project_pr(k)
    assert np.allclose(kp.Ak, k.Ak, atol=1e-12) and np.allclose(kp.Bk1, k.Bk1, atol=1e-12)


def test_direct_coupling_adds_drift_blocks(rng):
    p, k = cavity(), _controller(rng, passive=True)
    K = (np.array([[0.3 + 0.1j]]), np.zeros((1, 1)))
    base = assemble_closed_loop(p, k)
    cl = assemble_closed_loop(p, k, K)
    G12, G21 = coupling_drift(*K)
    assert np.allclose(cl.M - base.M, np.block([[np.zeros((2, 2)), G12], [G21, np.zeros((2, 2))]]))
    # passive coupling is an energy-exchange term: G12 = -G21^T
    assert np.allclose(G12, -G21.T)
    with pytest.raises(ValueError):
        assemble_closed_loop(p, k, (np.zeros((1, 2)), np.zeros((1, 2))))


def test_plant_validation():
    p = cavity()
    with pytest.raises(ValueError):
        PlantModel(A=np.eye(3), B0=p.B0, B1=p.B1, B2=p.B2, C2=p.C2, D20=p.D20, D21=p.D21,
                   C1=p.C1, D12=p.D12, Cz=p.Cz, Dz=p.Dz)
    with pytest.raises(ValueError):
        PlantModel(A=p.A, B0=p.B0, B1=p.B1, B2=p.B2, C2=p.C2, D20=p.D20, D21=p.D21,
                   C1=p.C1, D12=p.D12, Cz=p.Cz, Dz=np.eye(3))


def test_shape_mismatch_rejected(rng):
    k = build_controller_from_slh(random_slh(rng, n_channels=4), n_u=2, n_vk2=2, n_y=4)
    with pytest.raises(ValueError):
        assemble_closed_loop(cavity(), k)
