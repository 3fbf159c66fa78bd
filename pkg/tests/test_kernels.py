import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flagflow import _backend

BACKENDS = _backend.available()


def _herm(rng, n, complex_):
    a = rng.standard_normal((n, n))
    if complex_:
        a = a + 1j * rng.standard_normal((n, n))
    return a + a.conj().T


@pytest.fixture(params=BACKENDS)
def kernels(request):
    return _backend.get(request.param)


def test_python_backend_always_available():
    assert "python" in BACKENDS
    assert _backend.NAME in BACKENDS


@pytest.mark.parametrize("complex_", [False, True])
@pytest.mark.parametrize("n", [2, 3, 7, 16])
def test_eigh_matches_lapack(kernels, n, complex_):
    rng = np.random.default_rng(n)
    a = _herm(rng, n, complex_)
    w, v = kernels.eigh(a)
    assert np.allclose(w, np.linalg.eigvalsh(a), atol=1e-12 * np.linalg.norm(a))
    assert np.allclose(v.conj().T @ v, np.eye(n), atol=1e-12)
    assert np.allclose((v * w) @ v.conj().T, a, atol=1e-11 * np.linalg.norm(a))


def test_eigh_repeated_eigenvalues(kernels):
    rng = np.random.default_rng(0)
    k, _ = np.linalg.qr(rng.standard_normal((5, 5)))
    a = (k * np.array([-1.0, -1.0, 0.5, 0.5, 1.0])) @ k.T
    w, v = kernels.eigh(a)
    assert np.allclose(w, [-1, -1, 0.5, 0.5, 1], atol=1e-13)
    assert np.allclose((v * w) @ v.T, a, atol=1e-12)


def _gradient_oracle(x, q, values):
    w, u = np.linalg.eigh(x)
    qt = u.conj().T @ q @ u
    return u @ (np.abs(values[:, None] - values[None, :]) * qt) @ u.conj().T


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 6), complex_=st.booleans())
@settings(max_examples=30, deadline=None)
def test_backends_agree_on_gradient_field(seed, n, complex_):
    rng = np.random.default_rng(seed)
    values = np.sort(rng.uniform(-1, 1, n))
    values -= values.mean()
    if complex_:
        u, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    else:
        u, _ = np.linalg.qr(rng.standard_normal((n, n)))
    x = (u * values) @ u.conj().T
    x = 0.5 * (x + x.conj().T)
    q = _herm(rng, n, complex_)
    ref = _gradient_oracle(x, q, values)
    for name in BACKENDS:
        out = _backend.get(name).gradient_field(x, q, values)
        assert np.linalg.norm(out - ref) < 1e-10 * max(1, np.linalg.norm(ref))
        assert np.allclose(out, out.conj().T, atol=0)


def test_snap_spectrum_restores_values(kernels):
    rng = np.random.default_rng(5)
    u, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    values = np.array([-1.0, -0.25, 0.25, 1.0])
    x = (u * (values + 1e-7 * rng.standard_normal(4))) @ u.T
    out, drift = kernels.snap_spectrum(x, values)
    assert 0 < drift < 1e-6
    assert np.allclose(np.linalg.eigvalsh(out), values, atol=1e-14)
    assert np.linalg.norm(out - x) < 1e-6


def test_large_matrices_route_to_fallback(monkeypatch):
    assert _backend._pick(np.zeros((_backend.CROSSOVER_N + 1,) * 2)) is _backend.get("python")
    monkeypatch.setattr(_backend, "_impl", _backend.get(BACKENDS[0]))
    assert _backend._pick(np.zeros((2, 2))) is _backend.get(BACKENDS[0])
