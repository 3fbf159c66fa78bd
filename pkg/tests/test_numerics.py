import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flagflow.errors import DegeneracyError, PreconditionError, StiffnessError
from flagflow.numerics import (
    SpectralFrame, expm, herm_eig, ode_integrate, qr_orthonormalize, self_adjoint_eig, sym_eig,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@given(seed=seeds, n=st.integers(2, 8))
@settings(max_examples=40, deadline=None)
def test_sym_eig_reconstructs(seed, n):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    a = a + a.T
    sf = sym_eig(a)
    assert np.all(np.diff(sf.eigenvalues) >= 0)
    assert np.allclose(sf.frame.T @ sf.frame, np.eye(n), atol=1e-12)
    assert np.allclose(sf.reconstruct(), a, atol=1e-12 * max(1, np.linalg.norm(a)))


def test_sym_eig_rejects_nonsymmetric():
    with pytest.raises(PreconditionError):
        sym_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_herm_eig_and_dispatch():
    rng = np.random.default_rng(1)
    z = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    h = z + z.conj().T
    sf = self_adjoint_eig(h)
    assert np.allclose(sf.reconstruct(), h, atol=1e-12)
    assert np.allclose(herm_eig(h).eigenvalues, np.linalg.eigvalsh(h), atol=1e-12)


def test_frame_roundtrip():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((5, 5))
    sf = sym_eig(a + a.T)
    b = rng.standard_normal((5, 5))
    assert np.allclose(sf.from_frame(sf.to_frame(b)), b, atol=1e-12)
    assert isinstance(sf, SpectralFrame) and sf.n == 5


@given(seed=seeds, n=st.integers(2, 7))
@settings(max_examples=40, deadline=None)
def test_qr_keeps_nested_spans(seed, n):
    rng = np.random.default_rng(seed)
    b = rng.standard_normal((n, n))
    q = qr_orthonormalize(b)
    assert np.allclose(q.T @ q, np.eye(n), atol=1e-12)
    # the first j columns of q and b span the same subspace
    for j in range(1, n):
        p = q[:, :j] @ q[:, :j].T
        assert np.linalg.norm(b[:, :j] - p @ b[:, :j]) < 1e-10 * np.linalg.norm(b)
    # positive diagonal of R
    assert np.all(np.diag(q.T @ b) > 0)


def test_qr_reports_degenerate_column():
    b = np.array([[1.0, 2.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]])
    with pytest.raises(DegeneracyError) as info:
        qr_orthonormalize(b)
    assert info.value.column == 1


def test_expm_against_mpmath():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((4, 4))
    a = 3 * (a - a.T) + np.diag([0.5, -0.2, 0.1, -0.4])
    mp = mpmath.mp.clone()
    mp.dps = 40
    ref = np.array(mp.expm(mp.matrix(a.tolist())).tolist(), dtype=float)
    assert np.linalg.norm(expm(a) - ref) < 1e-12 * np.linalg.norm(ref)


def test_ode_exponential_decay():
    traj = ode_integrate(lambda y: -y, np.array([[1.0]]), 3.0, 1e-11, times=[0, 1, 2, 3])
    assert np.allclose(traj.times, [0, 1, 2, 3])
    assert np.allclose(traj.states[:, 0, 0], np.exp(-traj.times), rtol=1e-9)


def test_ode_harmonic_oscillator_matrix_state():
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    traj = ode_integrate(lambda y: rot @ y, np.eye(2), 2 * np.pi, 1e-12)
    assert np.allclose(traj.states[-1], np.eye(2), atol=1e-9)


def test_ode_zero_horizon():
    x0 = np.eye(2)
    traj = ode_integrate(lambda y: y, x0, 0.0, 1e-8)
    assert traj.n_steps == 0
    assert np.array_equal(traj.states[-1], x0)


def test_ode_post_step_is_applied():
    calls = []

    def post(y):
        calls.append(1)
        return y

    ode_integrate(lambda y: -y, np.ones((1, 1)), 1.0, 1e-8, post_step=post)
    assert calls


def test_ode_validates_inputs():
    with pytest.raises(PreconditionError):
        ode_integrate(lambda y: y, np.ones((1, 1)), 1.0, 1e-15)
    with pytest.raises(PreconditionError):
        ode_integrate(lambda y: y, np.ones((1, 1)), -1.0, 1e-8)


def test_ode_blowup_is_stiffness_error():
    # y' = y^2 blows up at t = 1
    with pytest.raises(StiffnessError):
        ode_integrate(lambda y: y * y, np.ones((1, 1)), 2.0, 1e-10)
