import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_spectrum
from flagflow.errors import PreconditionError
from flagflow.flow import s_inner
from flagflow.kahler import (
    CompactHeight, CompactOrbitPoint, ad, ad_inverse, compact_flow, complex_structure, kahler_form,
    kahler_form_from_generators, kahler_gradient, kahler_metric, tangent_space_basis, transport,
    verify_theorem_6_1,
)
from flagflow.lie import AlgebraContext, Family

seeds = st.integers(0, 2**32 - 1)


def compact_point(n, rng, spectrum=None, b_scale=1.0):
    ctx = AlgebraContext(Family.SU_COMPLEXIFIED, n, b_scale=b_scale)
    if spectrum is None:
        spectrum = random_spectrum(rng, n, min_gap=0.05)
    return CompactOrbitPoint.from_spectrum(ctx, spectrum, ctx.random_compact(rng))


def rand_tangent(x, rng):
    return sum(rng.standard_normal() * b for b in tangent_space_basis(x))


def test_rejects_real_family():
    with pytest.raises(PreconditionError):
        CompactOrbitPoint(AlgebraContext(Family.SL_REAL, 2), np.zeros((2, 2)))


def test_tangent_basis_spans_ad_x_image(rng):
    x = compact_point(4, rng, [-1.0, 0.0, 0.0, 1.0])
    basis = tangent_space_basis(x)
    assert len(basis) == 2 * 5  # real dimension of the flag manifold
    m = np.array([np.concatenate([b.real.ravel(), b.imag.ravel()]) for b in basis])
    assert np.linalg.matrix_rank(m) == len(basis)
    v = ad(x, x.ctx.random_k(rng).mat)
    coef, *_ = np.linalg.lstsq(m.T, np.concatenate([v.real.ravel(), v.imag.ravel()]), rcond=None)
    assert np.allclose(m.T @ coef, np.concatenate([v.real.ravel(), v.imag.ravel()]), atol=1e-10)


@given(seed=seeds, n=st.integers(2, 4))
@settings(max_examples=25, deadline=None)
def test_j_squared_is_minus_identity(seed, n):
    rng = np.random.default_rng(seed)
    x = compact_point(n, rng)
    for v in tangent_space_basis(x):
        assert np.linalg.norm(complex_structure(x, complex_structure(x, v)) + v) < 1e-10


@given(seed=seeds, n=st.integers(2, 4))
@settings(max_examples=25, deadline=None)
def test_omega_antisymmetric_and_compatible(seed, n):
    rng = np.random.default_rng(seed)
    x = compact_point(n, rng)
    v, w = rand_tangent(x, rng), rand_tangent(x, rng)
    scale = max(1.0, np.linalg.norm(v) * np.linalg.norm(w) / min(r.alpha for r in x.decomposition.positive_roots))
    assert abs(kahler_form(x, v, w) + kahler_form(x, w, v)) < 1e-10 * scale
    jv, jw = complex_structure(x, v), complex_structure(x, w)
    assert abs(kahler_form(x, jv, jw) - kahler_form(x, v, w)) < 1e-10 * scale
    assert abs(kahler_metric(x, v, w) - kahler_metric(x, w, v)) < 1e-10 * scale
    assert kahler_metric(x, v, v) > 0


def test_omega_ad_invariance(rng):
    x = compact_point(3, rng)
    for _ in range(10):
        v, w = rand_tangent(x, rng), rand_tangent(x, rng)
        k = x.ctx.random_compact(rng)
        y, kv, kw = transport(k, x, v, w)
        assert abs(kahler_form(y, kv, kw) - kahler_form(x, v, w)) < 1e-9
        assert np.linalg.norm(complex_structure(y, kv) - transport(k, x, complex_structure(x, v))[1]) < 1e-10


@pytest.mark.parametrize("n", [2, 3])
def test_kahler_metric_equals_s_metric_per_root(n):
    rng = np.random.default_rng(n)
    x = compact_point(n, rng)
    for _, mats in tangent_space_basis(x, by_root=True):
        for v in mats:
            for w in mats:
                ref = s_inner(-1j * v, -1j * w, x.hermitian)
                assert abs(kahler_metric(x, v, w) - ref) < 1e-12


def test_omega_from_generators(rng):
    x = compact_point(3, rng)
    for _ in range(5):
        a, b = x.ctx.random_k(rng).mat, x.ctx.random_k(rng).mat
        va, wb = ad(x, a), ad(x, b)
        # [a, x] = -ad(x) a
        assert abs(kahler_form_from_generators(x, a, b) - kahler_form(x, -va, -wb)) < 1e-10


def test_ad_inverse_inverts_ad(rng):
    x = compact_point(4, rng)
    w = rand_tangent(x, rng)
    assert np.linalg.norm(ad(x, ad_inverse(x, w)) - w) < 1e-10
    # ad(x)^{-1} acts on each root space as -J / alpha
    for root, mats in tangent_space_basis(x, by_root=True):
        for v in mats:
            assert np.linalg.norm(ad_inverse(x, v) + complex_structure(x, v) / root.alpha) < 1e-10


def test_su2_structure_by_hand():
    """x = i diag(1, -1): the only root has alpha = 2 and J acts as a rotation."""
    ctx = AlgebraContext(Family.SU_COMPLEXIFIED, 2)
    x = CompactOrbitPoint(ctx, np.diag([1j, -1j]))
    e = np.array([[0, 1], [-1, 0]], dtype=complex)
    f = np.array([[0, 1j], [1j, 0]])
    assert np.allclose(ad(x, e), 2 * f)
    assert np.allclose(complex_structure(x, e), f)
    assert np.allclose(complex_structure(x, f), -e)
    # ad(x) e = 2 f, so ad(x)^{-1} f = e / 2 and omega(e, f) = |e|^2 / 2
    assert kahler_form(x, e, f) == pytest.approx(1.0)
    assert kahler_metric(x, e, e) == pytest.approx(1.0)


@pytest.mark.parametrize("b_scale", [0.5, 1.0, 4.0])
def test_kahler_gradient_matches_riesz_solve(b_scale):
    rng = np.random.default_rng(9)
    x = compact_point(3, rng, b_scale=b_scale)
    q = x.ctx.random_k(rng, normalize=True).mat
    f = CompactHeight(q, x.ctx)
    basis = tangent_space_basis(x)
    gram = np.array([[kahler_metric(x, a, b) for b in basis] for a in basis])
    rhs = np.array([b_scale * np.real(np.vdot(b, q)) for b in basis])
    grad = sum(c * b for c, b in zip(np.linalg.solve(gram, rhs), basis))
    assert np.linalg.norm(kahler_gradient(q, x) - grad) < 1e-10
    # gradient of f is the velocity of exp(i t q).x at t = 0
    h = 1e-5
    fwd, bwd = compact_flow(q, x, [h])[0], compact_flow(q, x, [-h])[0]
    assert np.linalg.norm((fwd.mat - bwd.mat) / (2 * h) - grad) < 1e-7
    assert f(x) == pytest.approx(b_scale * np.real(np.vdot(x.mat, q)))


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_compact_flow_equivalence(n, seed):
    rng = np.random.default_rng(seed)
    x = compact_point(n, rng)
    q = x.ctx.random_k(rng, normalize=True).mat
    rep = verify_theorem_6_1(q, x, t_end=2.0, tol=1e-10)
    assert rep.verdict and rep.max_deviation < 5e-8
    assert rep.f_monotone


def test_compact_height_validation(rng):
    ctx = AlgebraContext(Family.SU_COMPLEXIFIED, 2)
    with pytest.raises(PreconditionError):
        CompactHeight(np.eye(2), ctx)
    with pytest.raises(PreconditionError):
        CompactHeight(1j * np.eye(2), ctx)
